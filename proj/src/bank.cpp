#include "radeval/bank.hpp"

#include <cmath>
#include <cstdio>

namespace radeval {

MemoryBank::MemoryBank() {
  const auto at = [](InfoKey k) { return static_cast<size_t>(k); };
  order_ = {InfoKey::Image, InfoKey::Information};
  values_[at(InfoKey::Image)] = "PLACEHOLDER_IMAGE";
  values_[at(InfoKey::Information)] = "PLACEHOLDER_INFORMATION";
  scores_[at(InfoKey::Image)] = 1.0;
  scores_[at(InfoKey::Information)] = 1.0;
  present_[at(InfoKey::Image)] = true;
  present_[at(InfoKey::Information)] = true;
}

bool MemoryBank::contains(InfoKey key) const {
  return present_[static_cast<size_t>(key)];
}

const std::string& MemoryBank::value(InfoKey key) const {
  if (!contains(key)) throw Error("bank has no entry " + std::string(to_string(key)));
  return values_[static_cast<size_t>(key)];
}

double MemoryBank::score(InfoKey key) const {
  if (!contains(key)) throw Error("bank has no entry " + std::string(to_string(key)));
  return scores_[static_cast<size_t>(key)];
}

void MemoryBank::set(InfoKey key, std::string value, double score) {
  if (is_fixed(key))
    throw Error("fixed bank entry cannot be overwritten: " +
                std::string(to_string(key)));
  const auto i = static_cast<size_t>(key);
  if (!present_[i]) {
    present_[i] = true;
    order_.push_back(key);
  }
  values_[i] = std::move(value);
  scores_[i] = score;
}

std::string python_float(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace

std::string MemoryBank::render_values() const {
  std::string out = "{";
  for (size_t i = 0; i < order_.size(); ++i) {
    if (i) out += ", ";
    out += quote(std::string(to_string(order_[i]))) + ": " + quote(value(order_[i]));
  }
  out += "}";
  return out;
}

std::string MemoryBank::render_scores() const {
  std::string out = "{";
  for (size_t i = 0; i < order_.size(); ++i) {
    if (i) out += ", ";
    out += quote(std::string(to_string(order_[i]))) + ": " + python_float(score(order_[i]));
  }
  out += "}";
  return out;
}

}  // namespace radeval
