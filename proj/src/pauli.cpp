#include "syqma/pauli.hpp"

#include <cctype>

namespace syqma {

PauliString parse_pauli(const std::string &text) {
  PauliString p;
  size_t i = 0;
  auto fail = [&](const std::string &why) {
    throw std::invalid_argument("bad Pauli '" + text + "': " + why);
  };
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    if (text[i] == '-') p.set_phase(2);
    ++i;
  }
  if (i >= text.size()) fail("empty operator");
  if (text.compare(i, std::string::npos, "I") == 0) return p;
  bool expect_factor = true;
  while (i < text.size()) {
    if (!expect_factor) {
      if (text[i] != '*') fail("expected '*' between factors");
      ++i;
    }
    if (i >= text.size()) fail("trailing '*'");
    char c = (char)std::toupper((unsigned char)text[i]);
    int letter;
    switch (c) {
      case 'X': letter = 1; break;
      case 'Y': letter = 2; break;
      case 'Z': letter = 3; break;
      default: fail("unknown factor letter"); letter = 0;
    }
    ++i;
    if (i >= text.size() || !std::isdigit((unsigned char)text[i]))
      fail("factor needs a qubit id");
    uint32_t q = 0;
    while (i < text.size() && std::isdigit((unsigned char)text[i])) {
      q = q * 10 + (uint32_t)(text[i] - '0');
      if (q > 1000000) fail("qubit id out of range");
      ++i;
    }
    if (p.letter(q) != 0) fail("repeated qubit id");
    p.set_letter(q, letter);
    expect_factor = false;
  }
  if (expect_factor) fail("empty operator");
  return p;
}

}  // namespace syqma
