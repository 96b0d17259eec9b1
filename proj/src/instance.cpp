#include "csm/instance.hpp"

#include <algorithm>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace csm {

const char* to_string(Side s) { return s == Side::men ? "men" : "women"; }

namespace {

// Index of an entry equal to an earlier one, or -1. Open-addressing table on
// the bit patterns; `table` is scratch space reused across calls.
std::ptrdiff_t find_tie(std::span<const double> values, std::vector<std::uint64_t>& table) {
  std::size_t size = 16;
  while (size < 2 * values.size()) size *= 2;
  constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  table.assign(size, kEmpty);
  const std::size_t mask = size - 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &values[i], sizeof bits);
    for (std::size_t h = mix64(bits) & mask;; h = (h + 1) & mask) {
      if (table[h] == kEmpty) {
        table[h] = bits;
        break;
      }
      if (table[h] == bits) return static_cast<std::ptrdiff_t>(i);
    }
  }
  return -1;
}

bool valid_score(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

DenseInstance::DenseInstance(std::size_t n, double p, std::vector<std::uint8_t> adm,
                             std::vector<double> x, std::vector<double> y)
    : n_(n), p_(p), adm_(std::move(adm)), x_(std::move(x)), y_(std::move(y)) {
  if (n_ == 0) throw std::invalid_argument("instance: n must be positive");
  if (!(p_ >= 0.0 && p_ <= 1.0)) throw std::invalid_argument("instance: p must lie in [0, 1]");
  const std::size_t cells = n_ * n_;
  if (adm_.size() != cells || x_.size() != cells || y_.size() != cells)
    throw std::invalid_argument("instance: matrices must be n x n");
  if (!std::all_of(x_.begin(), x_.end(), valid_score) ||
      !std::all_of(y_.begin(), y_.end(), valid_score))
    throw std::invalid_argument("instance: scores must lie strictly inside (0, 1)");
  for (auto& a : adm_) a = a ? 1 : 0;

  std::vector<std::uint64_t> scratch;
  std::vector<double> column(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (find_tie(std::span(x_).subspan(i * n_, n_), scratch) >= 0)
      throw std::invalid_argument("instance: tie in a man's scores");
    for (std::size_t m = 0; m < n_; ++m) column[m] = y_[m * n_ + i];
    if (find_tie(column, scratch) >= 0)
      throw std::invalid_argument("instance: tie in a woman's scores");
  }
}

std::size_t DenseInstance::admissible_count() const {
  return static_cast<std::size_t>(std::count(adm_.begin(), adm_.end(), std::uint8_t{1}));
}

DenseInstance generate_dense(std::size_t n, double p, StreamSpec spec) {
  if (n == 0) throw std::invalid_argument("generate_dense: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("generate_dense: p must lie in [0, 1]");
  Stream rng(spec);
  const std::size_t cells = n * n;
  std::vector<std::uint8_t> adm(cells);
  std::vector<double> x(cells);
  std::vector<double> y(cells);
  for (auto& a : adm) a = rng.bernoulli(p) ? 1 : 0;
  for (auto& v : x) v = rng.uniform();
  for (auto& v : y) v = rng.uniform();

  std::vector<std::uint64_t> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> row(x.data() + i * n, n);
    for (std::ptrdiff_t t; (t = find_tie(row, scratch)) >= 0;) row[static_cast<std::size_t>(t)] = rng.uniform();
  }
  std::vector<double> column(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (;;) {
      for (std::size_t m = 0; m < n; ++m) column[m] = y[m * n + j];
      const std::ptrdiff_t t = find_tie(column, scratch);
      if (t < 0) break;
      y[static_cast<std::size_t>(t) * n + j] = rng.uniform();
    }
  }
  return DenseInstance(DenseInstance::Unchecked{}, n, p, std::move(adm), std::move(x), std::move(y));
}

void write_instance(std::ostream& out, const DenseInstance& inst) {
  const std::size_t n = inst.n();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", inst.p());
  out << n << ' ' << buf << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out << (inst.admissible(i, j) ? '1' : '0');
    out << '\n';
  }
  auto write_matrix = [&](auto score) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", score(i, j));
        if (j) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  };
  write_matrix([&](std::size_t i, std::size_t j) { return inst.man_score(i, j); });
  write_matrix([&](std::size_t i, std::size_t j) { return inst.woman_score(i, j); });
}

DenseInstance read_instance(std::istream& in) {
  std::size_t n = 0;
  double p = 0.0;
  if (!(in >> n >> p)) throw std::runtime_error("instance text: bad header line");
  if (n == 0) throw std::runtime_error("instance text: n must be positive");
  std::vector<std::uint8_t> adm(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string row;
    if (!(in >> row) || row.size() != n)
      throw std::runtime_error("instance text: admissibility row " + std::to_string(i) + " malformed");
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] != '0' && row[j] != '1')
        throw std::runtime_error("instance text: admissibility must be 0/1");
      adm[i * n + j] = row[j] == '1';
    }
  }
  auto read_matrix = [&](const char* what) {
    std::vector<double> m(n * n);
    for (auto& v : m) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error(std::string("instance text: truncated ") + what);
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size())
        throw std::runtime_error(std::string("instance text: bad number in ") + what);
    }
    return m;
  };
  auto x = read_matrix("x");
  auto y = read_matrix("y");
  return DenseInstance(n, p, std::move(adm), std::move(x), std::move(y));
}

DenseInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  try {
    return read_instance(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace csm
