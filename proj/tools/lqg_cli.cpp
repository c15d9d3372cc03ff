#include <cstdio>
int main() { std::puts("lqg cli: not yet wired"); return 2; }
