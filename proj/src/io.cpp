#include "tcone/io.hpp"

#include "tcone/util.hpp"

#include <boost/algorithm/string.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace tcone {

namespace {

std::vector<std::string> split(const std::string& s, const char* delims) {
  std::vector<std::string> out;
  boost::split(out, s, boost::is_any_of(delims));
  return out;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string checksum(const std::string& payload) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(payload)));
  return buf;
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string t = boost::trim_copy(text);
  if (t.empty()) throw std::invalid_argument("empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || std::isnan(v)) throw std::invalid_argument("not a number: '" + t + "'");
  return v;
}

KSequence parse_ksequence(const std::string& text) {
  const auto parts = split(text, ",");
  if (parts.size() < 2) throw std::invalid_argument("K sequence needs a kind and values: '" + text + "'");
  if (parts[0] == "geometric" || parts[0] == "supergeometric") {
    if (parts.size() != 3) throw std::invalid_argument("K sequence '" + parts[0] + "' takes K0 and beta");
    const double K0 = parse_real(parts[1]), beta = parse_real(parts[2]);
    return parts[0] == "geometric" ? KSequence::geometric(K0, beta) : KSequence::super_geometric(K0, beta);
  }
  if (parts[0] == "list") {
    std::vector<double> v;
    for (std::size_t i = 1; i < parts.size(); ++i) v.push_back(parse_real(parts[i]));
    return KSequence::explicit_list(std::move(v));
  }
  throw std::invalid_argument("unknown K sequence kind '" + parts[0] + "'");
}

MetricDescriptor parse_descriptor(const std::string& text) {
  const auto p = split(text, ":");
  const std::string& kind = p[0];
  auto need = [&](std::size_t n) {
    if (p.size() != n) throw std::invalid_argument("descriptor '" + kind + "' takes " + std::to_string(n - 1) + " fields");
  };
  if (kind == "euclidean") {
    need(1);
    return MetricDescriptor::euclidean();
  }
  if (kind == "inverse-radial") {
    need(2);
    return MetricDescriptor::inverse_radial(parse_real(p[1]));
  }
  if (kind == "affine") {
    need(3);
    return MetricDescriptor::affine(parse_real(p[1]), parse_real(p[2]));
  }
  if (kind == "st") {
    need(5);
    return MetricDescriptor::potential_st(parse_real(p[1]), parse_real(p[2]), parse_real(p[3]), parse_real(p[4]));
  }
  if (kind == "union") {
    need(4);
    IntervalUnion I;
    for (const auto& iv : split(p[3], ";")) {
      const auto st = split(iv, ",");
      if (st.size() != 2) throw std::invalid_argument("interval must be 'S,T': '" + iv + "'");
      I.push_back({parse_real(st[0]), parse_real(st[1])});
    }
    return MetricDescriptor::potential_union(std::move(I), parse_real(p[2]), parse_real(p[1]));
  }
  if (kind == "lattice") {
    need(5);
    const double alpha = parse_real(p[1]);
    return MetricDescriptor::rescaled_lattice(make_lattice(alpha, parse_ksequence(p[4])),
                                              RescaleParams{parse_real(p[2]), parse_real(p[3])});
  }
  throw std::invalid_argument("unknown descriptor kind '" + kind + "'");
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CSV row width differs from header");
  for (const auto& f : fields)
    if (f.find_first_of(",\"\n") != std::string::npos) throw std::logic_error("CSV field needs quoting");
  for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << '\n';
  out_.flush();
}

DistanceCache::DistanceCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    const auto f = split(line, "\t");
    try {
      if (f.size() != 5 || checksum(f[0] + '\t' + f[1] + '\t' + f[2] + '\t' + f[3]) != f[4])
        throw std::invalid_argument("bad record");
      DistanceResult r;
      r.value = parse_real(f[1]);
      r.lower_bound = parse_real(f[2]);
      r.upper_bound = parse_real(f[3]);
      entries_[f[0]] = r;
    } catch (const std::invalid_argument&) {
      ++rejected_;  // recomputed on demand
    }
  }
}

std::string DistanceCache::key(const MetricDescriptor& desc, const Point3& x, const Point3& y, const SolverConfig& cfg) {
  return desc.fingerprint() + "|" + hex(x.zr) + "," + hex(x.zc1) + "," + hex(x.zc2) + "|" + hex(y.zr) + "," +
         hex(y.zc1) + "," + hex(y.zc2) + "|" + hex(cfg.grid_resolution) + "," + std::to_string(cfg.refinement_rounds) +
         "," + hex(cfg.quadrature_tol) + "," + hex(cfg.domain_padding);
}

std::optional<DistanceResult> DistanceCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void DistanceCache::put(const std::string& key, const DistanceResult& r) {
  if (key.find_first_of("\t\n") != std::string::npos) throw std::invalid_argument("cache key contains a separator");
  std::lock_guard lock(mu_);
  if (entries_.count(key)) return;
  const std::string payload = key + '\t' + hex(r.value) + '\t' + hex(r.lower_bound) + '\t' + hex(r.upper_bound);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to cache " + path_);
  out << payload << '\t' << checksum(payload) << '\n';
  DistanceResult stored = r;
  stored.witness = Polyline();
  entries_[key] = stored;
}

std::size_t DistanceCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

DistanceResult cached_distance(DistanceCache* cache, const MetricDescriptor& desc, const Point3& x, const Point3& y,
                               const SolverConfig& cfg) {
  if (!cache) return distance(desc, x, y, cfg);
  const std::string k = DistanceCache::key(desc, x, y, cfg);
  if (auto hit = cache->get(k)) return *hit;
  auto r = distance(desc, x, y, cfg);
  cache->put(k, r);
  return r;
}

}  // namespace tcone
