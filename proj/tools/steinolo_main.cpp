#include <clocale>

#include "steinolo/cli.hpp"

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");  // '.' decimal separator in all output
  return steinolo::cli::main_entry(argc, argv);
}
