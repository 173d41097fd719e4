#include "ctfkit/commands.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return ctfkit::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
