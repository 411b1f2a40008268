#pragma once

// CSV writers, content hashes and the JSON run manifest.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "nltaxis/solver.hpp"

namespace nltaxis {

inline constexpr const char* kVersion = "0.1.0";

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw OutputError("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw OutputError("cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

/// Keeps track of every file written into one output directory.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw OutputError("cannot create " + root_.string() + ": " + ec.message());
  }

  const std::filesystem::path& root() const { return root_; }

  void write(const std::string& relative, const std::string& content) {
    const auto p = root_ / relative;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw OutputError("cannot write " + p.string());
    files_.push_back({relative, sha256_hex(content)});
  }

  nlohmann::ordered_json listing() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& [name, hash] : files_) out.push_back({{"file", name}, {"sha256", hash}});
    return out;
  }

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// t, x, c, v with t outer and x inner.
inline std::string profiles_csv(const Grid1D& grid, const std::vector<Sample>& samples) {
  std::string s = "t,x,c,v\n";
  for (const auto& smp : samples)
    for (std::size_t i = 0; i < grid.size(); ++i)
      s += fmt_double(smp.t) + ',' + fmt_double(grid.center(i)) + ',' + fmt_double(smp.c[i]) + ',' +
           fmt_double(smp.v[i]) + '\n';
  return s;
}

inline std::string diagnostics_csv(const std::vector<Sample>& samples) {
  std::string s = "t,mass_c,min_c,max_c,mass_v\n";
  for (const auto& smp : samples)
    s += fmt_double(smp.t) + ',' + fmt_double(smp.mass_c) + ',' + fmt_double(smp.min_c) + ',' +
         fmt_double(smp.max_c) + ',' + fmt_double(smp.mass_v) + '\n';
  return s;
}

inline nlohmann::ordered_json stats_json(const RunResult& r) {
  return {{"status", std::string(to_string(r.status))},
          {"message", r.message},
          {"t_final", r.t_final},
          {"accepted_steps", r.stats.accepted},
          {"rejected_steps", r.stats.rejected},
          {"rhs_evaluations", r.stats.rhs_evals},
          {"last_step", r.stats.h}};
}

inline nlohmann::ordered_json diagnostics_summary(const RunResult& r) {
  nlohmann::ordered_json d;
  if (r.samples.empty()) return d;
  double min_c = r.samples.front().min_c, max_c = r.samples.front().max_c, drift = 0.0;
  const double m0 = r.samples.front().mass_c;
  for (const auto& s : r.samples) {
    min_c = std::min(min_c, s.min_c);
    max_c = std::max(max_c, s.max_c);
    if (m0 != 0.0) drift = std::max(drift, std::abs(s.mass_c - m0) / std::abs(m0));
  }
  d["samples"] = r.samples.size();
  d["min_c"] = min_c;
  d["max_c"] = max_c;
  d["relative_mass_drift"] = drift;
  return d;
}

}  // namespace nltaxis
