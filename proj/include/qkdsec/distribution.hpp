#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "operator.hpp"

namespace qkdsec {

// Nonnegative weights on a finite product alphabet A_0 x ... x A_{k-1},
// stored row-major with the last factor varying fastest.
class JointDistribution {
 public:
  JointDistribution(std::vector<std::vector<std::string>> alphabets, std::vector<double> weights)
      : alphabets_(std::move(alphabets)), weights_(std::move(weights)) {
    std::size_t total = 1;
    for (const auto& a : alphabets_) {
      if (a.empty()) throw std::invalid_argument("empty alphabet");
      total *= a.size();
    }
    if (weights_.size() != total) throw std::invalid_argument("weight count does not match alphabet sizes");
    double mass = 0.0;
    for (double w : weights_) {
      if (!std::isfinite(w) || w < 0.0) throw std::domain_error("weights must be finite and nonnegative");
      mass += w;
    }
    if (mass > 1.0 + 1e-12) throw std::domain_error("total mass " + std::to_string(mass) + " exceeds 1");
  }

  // Labels "0", "1", ... for each factor.
  static JointDistribution with_sizes(const std::vector<std::size_t>& sizes, std::vector<double> weights) {
    std::vector<std::vector<std::string>> alph;
    for (auto s : sizes) {
      std::vector<std::string> a;
      for (std::size_t i = 0; i < s; ++i) a.push_back(std::to_string(i));
      alph.push_back(std::move(a));
    }
    return {std::move(alph), std::move(weights)};
  }

  const std::vector<std::vector<std::string>>& alphabets() const { return alphabets_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t factors() const { return alphabets_.size(); }
  std::size_t size() const { return weights_.size(); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s;
    for (const auto& a : alphabets_) s.push_back(a.size());
    return s;
  }

  double total() const {
    double t = 0.0;
    for (double w : weights_) t += w;
    return t;
  }

  double operator[](std::size_t i) const { return weights_[i]; }

  double at(const std::vector<std::size_t>& idx) const { return weights_.at(detail::flatten(idx, sizes())); }

  // Keeps the listed factors (increasing order) and sums out the rest.
  JointDistribution marginal(const std::vector<std::size_t>& keep) const {
    const auto sz = sizes();
    std::vector<bool> kept(sz.size(), false);
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i] >= sz.size() || kept[keep[i]] || (i > 0 && keep[i] < keep[i - 1]))
        throw std::invalid_argument("marginal: invalid factor list");
      kept[keep[i]] = true;
    }
    std::vector<std::vector<std::string>> alph;
    std::vector<std::size_t> ksz;
    for (auto f : keep) {
      alph.push_back(alphabets_[f]);
      ksz.push_back(sz[f]);
    }
    std::size_t kt = 1;
    for (auto s : ksz) kt *= s;
    std::vector<double> w(kt, 0.0);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      auto m = detail::unflatten(i, sz);
      std::vector<std::size_t> km;
      for (auto f : keep) km.push_back(m[f]);
      w[detail::flatten(km, ksz)] += weights_[i];
    }
    return {std::move(alph), std::move(w)};
  }

  // Diagonal operator with one tensor factor per alphabet.
  HermitianOperator to_operator() const { return HermitianOperator::from_diagonal(sizes(), weights_); }

 private:
  std::vector<std::vector<std::string>> alphabets_;
  std::vector<double> weights_;
};

// Reads "label_1 ... label_k weight" lines; '#' starts a comment line.
// Labels of each column are ordered by first appearance; absent tuples get weight 0.
inline JointDistribution parse_distribution(std::istream& in) {
  std::vector<std::vector<std::string>> alph;
  std::vector<std::map<std::string, std::size_t>> index;
  std::vector<std::pair<std::vector<std::size_t>, double>> rows;
  std::map<std::vector<std::size_t>, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (tok.size() < 2) throw std::invalid_argument(where + "expected labels followed by a weight");
    if (width == 0) {
      width = tok.size() - 1;
      alph.resize(width);
      index.resize(width);
    } else if (tok.size() - 1 != width) {
      throw std::invalid_argument(where + "inconsistent number of labels");
    }
    double w = 0.0;
    try {
      std::size_t used = 0;
      w = std::stod(tok.back(), &used);
      if (used != tok.back().size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument(where + "weight '" + tok.back() + "' is not a number");
    }
    if (!std::isfinite(w) || w < 0.0) throw std::domain_error(where + "weight must be nonnegative");
    std::vector<std::size_t> idx(width);
    for (std::size_t f = 0; f < width; ++f) {
      auto [it, fresh] = index[f].try_emplace(tok[f], alph[f].size());
      if (fresh) alph[f].push_back(tok[f]);
      idx[f] = it->second;
    }
    if (!seen.emplace(idx, rows.size()).second) throw std::invalid_argument(where + "duplicate label tuple");
    rows.emplace_back(std::move(idx), w);
  }
  if (rows.empty()) throw std::invalid_argument("distribution table is empty");
  std::vector<std::size_t> sz;
  std::size_t total = 1;
  for (const auto& a : alph) {
    sz.push_back(a.size());
    total *= a.size();
  }
  std::vector<double> weights(total, 0.0);
  for (const auto& [idx, w] : rows) weights[detail::flatten(idx, sz)] = w;
  return {std::move(alph), std::move(weights)};
}

inline JointDistribution parse_distribution(const std::string& text) {
  std::istringstream in(text);
  return parse_distribution(in);
}

}  // namespace qkdsec
