#include <iostream>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::cerr << "webrl: CLI under construction\n";
  return 2;
}
