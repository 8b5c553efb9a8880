#include <string>
#include <vector>

#include "ncmac/cli.hpp"

int main(int argc, char** argv) {
  return ncmac::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
