#include "tcone/util.hpp"

#include <cmath>
#include <cstdio>

namespace tcone {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view job) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu:", static_cast<unsigned long long>(base));
  return fnv1a(job, fnv1a(buf));
}

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace tcone
