#include <iostream>
int main() { std::cout << "qtomo\n"; }
