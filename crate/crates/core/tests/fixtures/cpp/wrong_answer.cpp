#include <iostream>

int main() {
    long long x;
    std::cin >> x;
    std::cout << x + 1 << "\n";
}
