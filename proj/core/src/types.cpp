#include "consum/types.hpp"

#include <iostream>
#include <mutex>
#include <numeric>

namespace consum {

namespace {

std::mutex g_warning_mutex;
WarningSink g_warning_sink;

void default_warning_sink(std::string_view message) {
  std::cerr << "[consum] warning: " << message << "\n";
}

}  // namespace

std::string_view speaker_code(Speaker speaker) {
  return speaker == Speaker::Therapist ? "T" : "P";
}

std::string_view label_code(ComponentLabel label) {
  switch (label) {
    case ComponentLabel::SH: return "SH";
    case ComponentLabel::PD: return "PD";
    case ComponentLabel::RT: return "RT";
    case ComponentLabel::DF: return "DF";
  }
  throw Error("invalid ComponentLabel value");
}

Speaker speaker_from_code(std::string_view code) {
  if (code == "T") return Speaker::Therapist;
  if (code == "P") return Speaker::Patient;
  throw ParseError("unknown speaker code '" + std::string(code) +
                   "' (expected \"T\" or \"P\")");
}

ComponentLabel label_from_code(std::string_view code) {
  for (ComponentLabel label : kAllComponentLabels) {
    if (code == label_code(label)) return label;
  }
  throw ParseError("unknown component label '" + std::string(code) +
                   "' (expected SH, PD, RT, or DF)");
}

MaskArray MaskArray::from_bits(std::vector<std::uint8_t> bits) {
  for (std::uint8_t bit : bits) {
    if (bit > 1) throw Error("mask array values must be 0 or 1");
  }
  MaskArray mask;
  mask.bits_ = std::move(bits);
  return mask;
}

std::size_t MaskArray::popcount() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_warning_mutex);
  g_warning_sink = std::move(sink);
}

void reset_warning_sink() {
  std::lock_guard lock(g_warning_mutex);
  g_warning_sink = nullptr;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warning_mutex);
  if (g_warning_sink) {
    g_warning_sink(message);
  } else {
    default_warning_sink(message);
  }
}

}  // namespace consum
