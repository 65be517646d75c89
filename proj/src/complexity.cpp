#include "mrgc/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrgc/error.hpp"

namespace mrgc {

namespace {

void require_two_classes(const RepresentationCloud& cloud, const char* metric) {
  if (cloud.labels.size() != cloud.size()) {
    fail(ErrorKind::dimension_mismatch, std::string(metric) + ": label count does not match points");
  }
  if (cloud.classes().size() < 2) {
    fail(ErrorKind::single_class, std::string(metric) + " requires at least 2 classes");
  }
}

Matrix distance_matrix(const Matrix& points) {
  const std::size_t n = points.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = distance(points.row(i), points.row(j));
  return d;
}

std::vector<std::size_t> nearest_enemies(const Matrix& dist, const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> enemy(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j] == labels[i]) continue;
      if (dist(i, j) < best) {
        best = dist(i, j);
        enemy[i] = j;
      }
    }
  }
  return enemy;
}

Vector radii_from(const Matrix& dist, const std::vector<int>& labels, FhcRule rule) {
  const std::size_t n = labels.size();
  const auto enemy = nearest_enemies(dist, labels);
  Vector r(n, 0.0);
  if (rule == FhcRule::containment) {
    for (std::size_t i = 0; i < n; ++i) r[i] = 0.5 * dist(i, enemy[i]);
    return r;
  }
  // Mutual nearest enemies split their distance; otherwise a sphere grows
  // until it touches its enemy's sphere. Chains are resolved iteratively.
  std::vector<char> state(n, 0);  // 0 unseen, 1 on stack, 2 done
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] == 2) continue;
    std::vector<std::size_t> chain;
    std::size_t u = start;
    while (state[u] == 0) {
      state[u] = 1;
      chain.push_back(u);
      const std::size_t e = enemy[u];
      if (enemy[e] == u || state[e] == 1) {
        r[u] = 0.5 * dist(u, e);
        state[u] = 2;
        chain.pop_back();
        break;
      }
      u = e;
    }
    while (!chain.empty()) {
      const std::size_t v = chain.back();
      chain.pop_back();
      r[v] = std::max(0.0, dist(v, enemy[v]) - r[enemy[v]]);
      state[v] = 2;
    }
  }
  return r;
}

}  // namespace

double fdr(const RepresentationCloud& cloud) {
  require_two_classes(cloud, "fdr");
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  const auto classes = cloud.classes();
  Vector overall(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d; ++f) overall[f] += cloud.points(i, f);
  for (double& v : overall) v /= static_cast<double>(n);

  Vector between(d, 0.0), within(d, 0.0);
  for (int c : classes) {
    const auto rows = cloud.members(c);
    Vector mean(d, 0.0);
    for (std::size_t r : rows)
      for (std::size_t f = 0; f < d; ++f) mean[f] += cloud.points(r, f);
    for (double& v : mean) v /= static_cast<double>(rows.size());
    for (std::size_t f = 0; f < d; ++f) {
      const double gap = mean[f] - overall[f];
      between[f] += static_cast<double>(rows.size()) * gap * gap;
      for (std::size_t r : rows) {
        const double dev = cloud.points(r, f) - mean[f];
        within[f] += dev * dev;
      }
    }
  }
  double best = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    if (between[f] == 0.0) continue;
    if (within[f] == 0.0) return 0.0;
    best = std::max(best, between[f] / within[f]);
  }
  return 1.0 / (1.0 + best);
}

Vector fhc_radii(const RepresentationCloud& cloud, FhcRule rule) {
  require_two_classes(cloud, "fhc");
  return radii_from(distance_matrix(cloud.points), cloud.labels, rule);
}

double fhc(const RepresentationCloud& cloud, const FhcOptions& options) {
  require_two_classes(cloud, "fhc");
  const std::size_t n = cloud.size();
  const Matrix dist = distance_matrix(cloud.points);
  const Vector r = radii_from(dist, cloud.labels, options.rule);

  std::size_t spheres = 0;
  if (options.rule == FhcRule::containment) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
    std::vector<std::size_t> survivors;
    for (std::size_t j : order) {
      const bool absorbed = std::any_of(survivors.begin(), survivors.end(), [&](std::size_t i) {
        return dist(i, j) + r[j] <= r[i] + options.slack;
      });
      if (!absorbed) survivors.push_back(j);
    }
    spheres = survivors.size();
  } else {
    std::vector<std::vector<std::size_t>> covers(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j == i || dist(i, j) < r[i]) covers[i].push_back(j);
    std::vector<char> covered(n, 0);
    std::size_t remaining = n;
    while (remaining > 0) {
      std::size_t best = n, best_count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (covered[i]) continue;
        std::size_t count = 0;
        for (std::size_t j : covers[i]) count += covered[j] ? 0 : 1;
        if (count > best_count) {
          best = i;
          best_count = count;
        }
      }
      for (std::size_t j : covers[best]) {
        if (!covered[j]) {
          covered[j] = 1;
          --remaining;
        }
      }
      ++spheres;
    }
  }
  return static_cast<double>(spheres) / static_cast<double>(n);
}

double loss_sep(const RepresentationCloud& cloud) {
  double class_sum = 0.0;
  for (int c : cloud.classes()) {
    const auto rows = cloud.members(c);
    class_sum += manifold_volume(cloud.points.select_rows(rows)).volume;
  }
  const double gap = class_sum - manifold_volume(cloud.points).volume;
  return gap * gap;
}

ComplexityReport complexity_report(const RepresentationCloud& cloud,
                                   const IdEstimatorConfig& id_config,
                                   const FhcOptions& fhc_options) {
  auto named = [](const char* metric, auto&& compute) {
    try {
      return compute();
    } catch (const Error& e) {
      throw e.with_context(metric);
    }
  };
  ComplexityReport report;
  report.fdr = named("fdr", [&] { return fdr(cloud); });
  report.fhc = named("fhc", [&] { return fhc(cloud, fhc_options); });
  report.id_estimate = named("id", [&] { return mle_id(cloud, id_config); });
  named("volume", [&] {
    for (int c : cloud.classes())
      report.class_volumes.push_back(manifold_volume(cloud.points.select_rows(cloud.members(c))).volume);
    report.total_volume = manifold_volume(cloud.points).volume;
    return 0;
  });
  return report;
}

std::string report_json(const ComplexityReport& report, const std::string& extra_json) {
  std::string out = "{\"id\": " + format_double(report.id_estimate);
  out += ", \"fdr\": " + format_double(report.fdr);
  out += ", \"fhc\": " + format_double(report.fhc);
  out += ", \"class_volumes\": [";
  for (std::size_t i = 0; i < report.class_volumes.size(); ++i) {
    if (i) out += ", ";
    out += format_double(report.class_volumes[i]);
  }
  out += "], \"total_volume\": " + format_double(report.total_volume);
  if (!extra_json.empty()) out += ", " + extra_json;
  out += "}\n";
  return out;
}

}  // namespace mrgc
