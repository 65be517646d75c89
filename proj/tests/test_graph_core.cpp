#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mrgc/error.hpp"
#include "mrgc/graph.hpp"
#include "support/synthetic.hpp"

using namespace mrgc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mrgc_graph_core";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

Graph path3() {
  return Graph(Matrix{{0.5, 1.0}, {-2.0, 0.125}, {3.0, 1e-7}}, {{0, 1}, {1, 2}}, {0, 0, 1}, 2);
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::io;
}

}  // namespace

TEST_SUITE("graph-core") {
  TEST_CASE("minimal json graph is symmetrized") {
    const Graph g = parse_graph_json(
        R"({"num_nodes":2,"features":[[1,0],[0,1]],"edges":[[0,1]],"labels":[0,1]})");
    CHECK(g.num_nodes() == 2);
    CHECK(g.num_classes() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(g.num_edges() == 1);
  }

  TEST_CASE("self-loop rejected") {
    CHECK(kind_of([] {
            parse_graph_json(R"({"num_nodes":2,"features":[[1,0],[0,1]],"edges":[[0,0]],"labels":[0,1]})");
          }) == ErrorKind::invariant);
  }

  TEST_CASE("invariant violations") {
    CHECK(kind_of([] { Graph(Matrix{{1.0}, {2.0}}, {}, {0, 2}, 2); }) == ErrorKind::invariant);
    CHECK(kind_of([] { Graph(Matrix{{1.0}, {2.0}}, {}, {0, 0}, 2); }) == ErrorKind::invariant);
    CHECK(kind_of([] {
            Graph(Matrix{{1.0}, {std::numeric_limits<double>::infinity()}}, {}, {0, 1}, 2);
          }) == ErrorKind::invariant);
    CHECK(kind_of([] { Graph(Matrix{{1.0}, {2.0}}, {{0, 5}}, {0, 1}, 2); }) == ErrorKind::invariant);
  }

  TEST_CASE("malformed files are parse errors") {
    CHECK(kind_of([] { parse_graph_json("{\"num_nodes\": 2, "); }) == ErrorKind::parse);
    CHECK(kind_of([] { parse_graph_json(R"({"num_nodes":1,"features":[["a"]],"edges":[],"labels":[0]})"); }) ==
          ErrorKind::parse);
  }

  TEST_CASE("duplicate and reversed edges collapse") {
    const Graph g(Matrix(3, 1), {{0, 1}, {1, 0}, {0, 1}, {2, 1}}, {0, 0, 0}, 1);
    CHECK(g.num_edges() == 2);
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
  }

  TEST_CASE("csv triplet loads the path graph") {
    const fs::path dir = scratch("p3_csv");
    fs::create_directories(dir);
    write(dir / "features.csv", "1,2\n3,4\n5,6\n");
    write(dir / "edges.csv", "0,1\n1,2");
    write(dir / "labels.csv", "0\n0\n1\n");
    const Graph g = load_graph(dir);
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_classes() == 2);
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
    CHECK(g.degree(1) == 2);
    CHECK(g.features()(2, 1) == 6.0);

    const fs::path again = scratch("p3_csv_roundtrip");
    save_graph(g, again, GraphFormat::csv_triplet);
    const Graph h = load_graph(again, GraphFormat::csv_triplet);
    CHECK(h.features() == g.features());
    CHECK(h.edges() == g.edges());
    CHECK(h.labels() == g.labels());
  }

  TEST_CASE("json round trip is bit exact") {
    const Graph g = path3();
    const fs::path p = scratch("p3.json");
    save_graph(g, p);
    const Graph h = load_graph(p);
    CHECK(h.features() == g.features());
    CHECK(h.edges() == g.edges());
    CHECK(h.labels() == g.labels());
    CHECK(h.num_classes() == g.num_classes());

    const Graph blob = testing::blob_graph(3, {.nodes = 40});
    save_graph(blob, scratch("blob.json"));
    const Graph b2 = load_graph(scratch("blob.json"));
    CHECK(b2.features() == blob.features());
    CHECK(b2.edges() == blob.edges());
  }

  TEST_CASE("condensed round trip") {
    CondensedGraph c{Matrix{{0.1, 0.2}, {1.0 / 3.0, -4.5}, {7.0, 8.0}, {1e-300, 2.5}}, {0, 0, 1, 1}, {}, 2};
    const fs::path p = scratch("condensed.json");
    save_graph(c, p);
    const CondensedGraph d = load_condensed(p);
    CHECK(d == c);
  }

  TEST_CASE("unwritable path") {
    CHECK(kind_of([] { save_graph(path3(), "/nonexistent_dir_mrgc/sub/g.json"); }) == ErrorKind::io);
    CHECK(kind_of([] { load_graph("/nonexistent_dir_mrgc/g.json"); }) == ErrorKind::io);
  }

  TEST_CASE("representation is A squared X") {
    const Graph g(Matrix::identity(3), {{0, 1}, {1, 2}}, {0, 0, 1}, 2);
    const Matrix z = representation(g.features(), g);
    CHECK(z == Matrix{{1, 0, 1}, {0, 2, 0}, {1, 0, 1}});

    const Graph empty(testing::gaussian_matrix(1, 4, 3), {}, {0, 1, 0, 1}, 2);
    CHECK(representation(empty.features(), empty) == Matrix(4, 3));
  }

  TEST_CASE("representation is linear in the features") {
    const Graph g = testing::blob_graph(5, {.nodes = 30});
    const Matrix x1 = testing::gaussian_matrix(8, 30, 6);
    const Matrix x2 = testing::gaussian_matrix(9, 30, 6);
    const Matrix lhs = representation(2.0 * x1 + (-3.0) * x2, g);
    const Matrix rhs = 2.0 * representation(x1, g) + (-3.0) * representation(x2, g);
    for (std::size_t i = 0; i < lhs.values().size(); ++i)
      CHECK(lhs.values()[i] == doctest::Approx(rhs.values()[i]).epsilon(1e-12));
  }

  TEST_CASE("representation dimension mismatch") {
    CHECK(kind_of([] { representation(Matrix(2, 2), std::vector<Edge>{{0, 3}}); }) ==
          ErrorKind::dimension_mismatch);
  }

  TEST_CASE("structure-free condensed cloud") {
    const CondensedGraph c{Matrix{{1, 2}, {3, 4}}, {0, 1}, {}, 2};
    const auto cloud = condensed_cloud(c);
    CHECK(cloud.points == c.features);
    CHECK(cloud.labels == c.labels);
  }

  TEST_CASE("knn on a line") {
    const Matrix pts{{0.0}, {1.0}, {3.0}};
    const auto nn = knn(pts, 0, 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0] == Neighbor{1, 1.0});
    CHECK(nn[1] == Neighbor{2, 3.0});
  }

  TEST_CASE("knn keeps duplicates and breaks ties by index") {
    const Matrix pts{{0.0}, {1.0}, {0.0}, {-1.0}};
    const auto nn = knn(pts, 0, 3);
    CHECK(nn[0] == Neighbor{2, 0.0});
    CHECK(nn[1] == Neighbor{1, 1.0});
    CHECK(nn[2] == Neighbor{3, 1.0});
  }

  TEST_CASE("knn too large") {
    Matrix grid(10, 2);
    for (std::size_t i = 0; i < 10; ++i) grid(i, 0) = static_cast<double>(i);
    CHECK(kind_of([&] { knn(grid, 0, 10); }) == ErrorKind::k_too_large);
  }

  TEST_CASE("knn distances ascend and exclude the query") {
    const Matrix pts = testing::gaussian_matrix(4, 50, 3);
    for (std::size_t q = 0; q < 50; q += 7) {
      const auto nn = knn(pts, q, 12);
      for (std::size_t i = 0; i < nn.size(); ++i) {
        CHECK(nn[i].index != q);
        if (i) CHECK(nn[i - 1].distance <= nn[i].distance);
      }
    }
  }
}
