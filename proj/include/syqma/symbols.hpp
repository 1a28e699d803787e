#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace syqma {

using SymbolId = uint32_t;
constexpr SymbolId kNoSymbol = UINT32_MAX;
constexpr uint32_t kNoChannel = UINT32_MAX;

enum class SymbolKind : uint8_t {
  FlipFactor,   // eps_f attached to a flip qubit
  Angle,        // rotation angle theta
  MeasSign,     // measurement outcome m in {+1,-1}
  SyndromeSign, // syndrome projection outcome s in {+1,-1}
  Rate,         // error-rate variable p
};

// True for symbols whose value ranges over {+1,-1} and which square to one.
inline bool is_sign_kind(SymbolKind k) {
  return k == SymbolKind::MeasSign || k == SymbolKind::SyndromeSign;
}

struct SymbolInfo {
  SymbolKind kind;
  std::string name;
  uint32_t parent_channel = kNoChannel;  // for channel-owned flip factors
};

class SymbolTable {
 public:
  SymbolId create(SymbolKind kind, std::string name,
                  uint32_t parent_channel = kNoChannel) {
    auto it = by_name_.find(name);
    if (it != by_name_.end()) {
      const SymbolInfo &old = infos_[it->second];
      if (old.kind != kind)
        throw std::invalid_argument("symbol '" + name +
                                    "' already declared with a different kind");
      return it->second;
    }
    SymbolId id = (SymbolId)infos_.size();
    infos_.push_back(SymbolInfo{kind, name, parent_channel});
    by_name_.emplace(std::move(name), id);
    return id;
  }

  const SymbolInfo &info(SymbolId id) const { return infos_.at(id); }
  const std::string &name(SymbolId id) const { return infos_.at(id).name; }
  SymbolKind kind(SymbolId id) const { return infos_.at(id).kind; }
  size_t size() const { return infos_.size(); }

  SymbolId find(const std::string &name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? kNoSymbol : it->second;
  }

 private:
  std::vector<SymbolInfo> infos_;
  std::unordered_map<std::string, SymbolId> by_name_;
};

}  // namespace syqma
