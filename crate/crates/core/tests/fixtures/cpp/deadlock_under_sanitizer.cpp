// Lock-order inversion that only bites in the instrumented build, so the
// plain build passes its tests and the race stage sees a hang.
#include <chrono>
#include <iostream>
#include <mutex>
#include <thread>

std::mutex a, b;

int main() {
    long long x;
    std::cin >> x;
#if defined(__SANITIZE_THREAD__)
    std::thread t1([] {
        std::lock_guard<std::mutex> la(a);
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        std::lock_guard<std::mutex> lb(b);
    });
    std::thread t2([] {
        std::lock_guard<std::mutex> lb(b);
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        std::lock_guard<std::mutex> la(a);
    });
    t1.join();
    t2.join();
#endif
    std::cout << x << "\n";
}
