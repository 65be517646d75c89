#include <doctest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "mrgc/complexity.hpp"
#include "mrgc/error.hpp"
#include "support/synthetic.hpp"

using namespace mrgc;

namespace {

RepresentationCloud line(std::vector<double> xs, std::vector<int> labels) {
  Matrix m(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
  return {m, std::move(labels)};
}

RepresentationCloud two_blobs(std::uint64_t seed, double gap) {
  Matrix pts = testing::gaussian_matrix(seed, 60, 2, 0.5);
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < 60; ++i) {
    labels[i] = i < 30 ? 0 : 1;
    pts(i, 0) += labels[i] ? gap : -gap;
  }
  return {pts, labels};
}

}  // namespace

TEST_SUITE("complexity") {
  TEST_CASE("fdr hand values") {
    CHECK(fdr(line({-1.0, 1.0, -2.0, 2.0}, {0, 0, 1, 1})) == 1.0);
    CHECK(fdr(line({0.0, 0.0, 1.0, 1.0}, {0, 0, 1, 1})) == 0.0);
    CHECK(std::abs(fdr(line({0.0, 2.0, 4.0, 6.0}, {0, 0, 1, 1})) - 0.2) < 1e-12);
  }

  TEST_CASE("fdr takes the most discriminative coordinate") {
    const RepresentationCloud c{Matrix{{0, 0}, {2, 0}, {4, 1}, {6, 1}}, {0, 0, 1, 1}};
    CHECK(fdr(c) == 0.0);
    const RepresentationCloud d{Matrix{{0, 0}, {2, 1}, {4, 0}, {6, 1}}, {0, 0, 1, 1}};
    CHECK(std::abs(fdr(d) - 0.2) < 1e-12);
  }

  TEST_CASE("fdr affine invariance") {
    const RepresentationCloud c = two_blobs(3, 0.4);
    RepresentationCloud t = c;
    for (std::size_t i = 0; i < t.size(); ++i) {
      t.points(i, 0) = -3.0 * t.points(i, 0) + 7.0;
      t.points(i, 1) = 0.01 * t.points(i, 1) - 2.0;
    }
    CHECK(std::abs(fdr(t) - fdr(c)) < 1e-9);
  }

  TEST_CASE("single class errors") {
    const auto c = line({0.0, 1.0, 2.0}, {0, 0, 0});
    auto kind = [](auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::io;
    };
    CHECK(kind([&] { fdr(c); }) == ErrorKind::single_class);
    CHECK(kind([&] { fhc(c); }) == ErrorKind::single_class);
    try {
      complexity_report(RepresentationCloud{testing::uniform_cube(1, 20, 2, 2), std::vector<int>(20, 0)});
      FAIL("expected SingleClass");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::single_class);
      CHECK(std::string(e.what()).find("fdr") != std::string::npos);
    }
  }

  TEST_CASE("fhc hand values") {
    CHECK(fhc(line({0.0, 1.0}, {0, 1})) == 1.0);
    CHECK(std::abs(fhc(line({0.0, 0.0, 10.0}, {0, 0, 1})) - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(fhc(line({0.0, 1.0, 2.0, 100.0}, {0, 0, 0, 1})) - 0.5) < 1e-12);
  }

  TEST_CASE("fhc radii") {
    const Vector r = fhc_radii(line({0.0, 1.0, 2.0, 100.0}, {0, 0, 0, 1}), FhcRule::cover);
    CHECK(r == Vector{51.0, 50.0, 49.0, 49.0});
    const Vector h = fhc_radii(line({0.0, 1.0, 2.0, 100.0}, {0, 0, 0, 1}), FhcRule::containment);
    CHECK(h == Vector{50.0, 49.5, 49.0, 49.0});
  }

  TEST_CASE("fhc containment rule") {
    const FhcOptions opt{FhcRule::containment};
    CHECK(fhc(line({0.0, 1.0}, {0, 1}), opt) == 1.0);
    CHECK(std::abs(fhc(line({0.0, 0.0, 10.0}, {0, 0, 1}), opt) - 2.0 / 3.0) < 1e-12);
    CHECK(fhc(line({0.0, 1.0, 2.0, 100.0}, {0, 0, 0, 1}), opt) == 1.0);
  }

  TEST_CASE("fhc scale invariance") {
    const RepresentationCloud c = two_blobs(5, 0.3);
    for (FhcRule rule : {FhcRule::cover, FhcRule::containment}) {
      RepresentationCloud s = c;
      for (double& v : s.points.values()) v *= 4.0;
      CHECK(std::abs(fhc(s, {rule}) - fhc(c, {rule})) < 1e-12);
    }
  }

  TEST_CASE("loss_sep examples") {
    CHECK(loss_sep(RepresentationCloud{testing::gaussian_matrix(1, 10, 3), std::vector<int>(10, 0)}) == 0.0);
    CHECK(loss_sep(RepresentationCloud{Matrix(2, 3), {0, 1}}) == 1.0);
  }

  TEST_CASE("loss_sep with duplicated class point sets") {
    // Stacking two copies leaves Σ unchanged, so both class volumes equal the total.
    const Matrix a = testing::gaussian_matrix(2, 8, 2);
    Matrix both(16, 2);
    std::vector<int> labels(16);
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t c = 0; c < 2; ++c) both(i, c) = a(i % 8, c);
      labels[i] = i < 8 ? 0 : 1;
    }
    const double v = manifold_volume(a).volume;
    CHECK(loss_sep({both, labels}) == doctest::Approx(v * v).epsilon(1e-12));
  }

  TEST_CASE("adding a class raises the volume sum") {
    const Matrix a = testing::gaussian_matrix(3, 10, 2);
    const Matrix b = testing::gaussian_matrix(4, 10, 2, 2.0);
    const double total = manifold_volume(a).volume;
    const double sum_before = manifold_volume(a).volume;
    const double sum_after = sum_before + manifold_volume(b).volume;
    CHECK(sum_after >= sum_before + 1.0);
    CHECK((sum_after - total) * (sum_after - total) >= (sum_before - total) * (sum_before - total));
  }

  TEST_CASE("report on separated and shuffled clouds") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const RepresentationCloud c = two_blobs(seed, 2.0);
      const ComplexityReport r = complexity_report(c);
      CHECK(r.fdr < 0.3);
      CHECK(r.fhc < 0.5);
      CHECK(r.total_volume >= 1.0);
      for (double v : r.class_volumes) CHECK(v >= 1.0);

      RepresentationCloud shuffled = c;
      std::mt19937_64 rng(seed + 40);
      std::shuffle(shuffled.labels.begin(), shuffled.labels.end(), rng);
      const ComplexityReport s = complexity_report(shuffled);
      CHECK(s.fdr > r.fdr);
      CHECK(s.fhc > r.fhc);
    }
  }

  TEST_CASE("report json") {
    const ComplexityReport r = complexity_report(two_blobs(1, 1.0));
    const auto j = nlohmann::json::parse(report_json(r, "\"extra\": 1"));
    for (const char* key : {"id", "fdr", "fhc", "class_volumes", "total_volume"}) CHECK(j.contains(key));
    CHECK(j["class_volumes"].size() == 2);
    CHECK(j["fdr"].get<double>() == r.fdr);
    CHECK(j["extra"] == 1);
  }
}
