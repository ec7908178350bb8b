#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wdix/error.hpp"
#include "wdix/panel.hpp"

namespace wdix {

/// Symmetric country x country Euclidean distances over shared years.
struct DissimilarityMatrix {
  std::vector<std::string> countries;
  std::vector<double> d;       // row-major; NaN where the pair shares no year
  std::vector<int> n_shared;   // years observed in both countries

  std::size_t size() const { return countries.size(); }

  std::optional<double> distance(std::size_t i, std::size_t j) const {
    const double v = d[i * size() + j];
    if (std::isnan(v)) return std::nullopt;
    return v;
  }
  int shared(std::size_t i, std::size_t j) const { return n_shared[i * size() + j]; }
};

/// For each pair, sqrt((Y / m) * sum of squared differences over the m shared years),
/// Y being the panel's year count. With complete data this is plain Euclidean distance.
inline DissimilarityMatrix compute_dissimilarity(const ValidPanel& panel) {
  const std::size_t n = panel.country_count();
  if (n < 2) {
    throw Error(ErrorCode::SingleCountry,
                "dissimilarity needs at least 2 countries, panel has " + std::to_string(n));
  }
  const std::size_t years = panel.year_count();
  DissimilarityMatrix m;
  m.countries = panel.countries;
  m.d.assign(n * n, 0.0);
  m.n_shared.assign(n * n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    int own = 0;
    for (std::size_t k = 0; k < years; ++k) own += is_valid_value(panel.value(i, k)) ? 1 : 0;
    m.n_shared[i * n + i] = own;
    for (std::size_t j = i + 1; j < n; ++j) {
      double ss = 0.0;
      int shared = 0;
      for (std::size_t k = 0; k < years; ++k) {
        const auto& a = panel.value(i, k);
        const auto& b = panel.value(j, k);
        if (!is_valid_value(a) || !is_valid_value(b)) continue;
        const double diff = *a - *b;
        ss += diff * diff;
        ++shared;
      }
      double dist = std::numeric_limits<double>::quiet_NaN();
      if (shared > 0) {
        dist = shared == static_cast<int>(years)
                   ? std::sqrt(ss)
                   : std::sqrt(static_cast<double>(years) / shared * ss);
      }
      m.d[i * n + j] = m.d[j * n + i] = dist;
      m.n_shared[i * n + j] = m.n_shared[j * n + i] = shared;
    }
  }
  return m;
}

struct VariationRecord {
  std::string country;
  std::string group;
  std::optional<double> country_avg_dist;
  std::optional<double> within_group_avg_dist;  // missing for singleton groups
  std::optional<double> sil_width;              // missing when no other group exists
  int usable_pairs = 0;                         // other countries with a defined distance
};

/// Average distances and silhouette widths under a given labelling. `labels` is
/// parallel to the matrix's country order.
inline std::vector<VariationRecord> compute_variation(const DissimilarityMatrix& diss,
                                                      const std::vector<std::string>& labels) {
  const std::size_t n = diss.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::UnlabeledCountry, std::to_string(n) + " countries but " +
                                                 std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i].empty()) throw Error(ErrorCode::UnlabeledCountry, diss.countries[i]);
  }
  bool any_pair = false;
  for (std::size_t i = 0; i < n && !any_pair; ++i) {
    for (std::size_t j = i + 1; j < n && !any_pair; ++j) any_pair = diss.distance(i, j).has_value();
  }
  if (n >= 2 && !any_pair) {
    throw Error(ErrorCode::AllPairsMissing, "no pair of countries shares an observed year");
  }

  std::map<std::string, std::size_t> level_index;
  for (const auto& l : labels) level_index.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [name, idx] : level_index) idx = next++;
  std::vector<std::size_t> group_of(n);
  std::vector<std::size_t> group_size(level_index.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    group_of[i] = level_index.at(labels[i]);
    ++group_size[group_of[i]];
  }

  std::vector<VariationRecord> out;
  out.reserve(n);
  std::vector<double> sum(level_index.size());
  std::vector<int> cnt(level_index.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(cnt.begin(), cnt.end(), 0);
    double total = 0.0;
    int pairs = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto d = diss.distance(i, j);
      if (!d) continue;
      total += *d;
      ++pairs;
      sum[group_of[j]] += *d;
      ++cnt[group_of[j]];
    }

    VariationRecord r;
    r.country = diss.countries[i];
    r.group = labels[i];
    r.usable_pairs = pairs;
    if (pairs > 0) r.country_avg_dist = total / pairs;

    const std::size_t own = group_of[i];
    std::optional<double> a;
    if (cnt[own] > 0) a = sum[own] / cnt[own];
    r.within_group_avg_dist = a;

    std::optional<double> b;
    for (std::size_t g = 0; g < sum.size(); ++g) {
      if (g == own || cnt[g] == 0) continue;
      const double avg = sum[g] / cnt[g];
      if (!b || avg < *b) b = avg;
    }

    if (group_size[own] == 1 && b) {
      r.sil_width = 0.0;
    } else if (a && b) {
      r.sil_width = *a == *b ? 0.0 : (*b - *a) / std::max(*a, *b);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<VariationRecord> compute_variation(const ValidPanel& panel, GroupVar g,
                                                      const DissimilarityMatrix* diss = nullptr) {
  if (diss) {
    if (diss->countries != panel.countries) {
      throw Error(ErrorCode::InvalidArgument, "dissimilarity matrix was built for another panel");
    }
    return compute_variation(*diss, panel.labels(g));
  }
  return compute_variation(compute_dissimilarity(panel), panel.labels(g));
}

}  // namespace wdix
