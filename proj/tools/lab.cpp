#include "rdlab/assembly.hpp"

#include <iostream>

int main() {
    std::cout << "lab: placeholder\n";
    return 0;
}
