#include "nltaxis/cli.hpp"

int main(int argc, char** argv) {
  return nltaxis::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
