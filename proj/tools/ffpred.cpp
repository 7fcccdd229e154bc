#include <iostream>

#include "ffpred/ffpred.hpp"

int main() {
  std::cout << "ffpred\n";
  return 0;
}
