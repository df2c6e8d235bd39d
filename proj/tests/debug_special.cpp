#include "epsilon/elimination.hpp"
#include "epsilon/printer.hpp"
#include <iostream>
#include "corpus.hpp"

using namespace eps;

void run(const char* name, Proof p) {
  std::cout << "=== " << name << " ===\n";
  for (size_t i = 0; i < p.lines.size(); ++i)
    std::cout << i << ": " << print(p.lines[i].formula) << "  ["
              << justification_name(p.lines[i].just.kind) << "]\n";
  try {
    auto out = eliminate_special(p, p.conclusion());
    std::cout << "ok, lines: " << out.lines.size()
              << " specials left: " << proof_metrics(out).special.size() << "\n";
  } catch (const Error& e) {
    std::cout << "ERROR: " << e.what() << "\n";
  }
}

int main() {
  run("with_critical", corpus::special_with_critical());
  run("same_position", corpus::special_same_position());
  run("different_positions", corpus::special_different_positions());
  run("trivial", corpus::special_trivial_instance());
  return 0;
}
