#include <doctest.h>

#include <set>
#include <sstream>

#include "planeclust/data.hpp"
#include "planeclust/error.hpp"

using namespace planeclust;

namespace {

Dataset parse(const std::string& text, CsvOptions opts = {}) {
  std::istringstream in(text);
  return read_csv(in, opts, "test.csv");
}

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

int count_distinct(const Labels& l) {
  std::set<int> s(l.values().begin(), l.values().end());
  return static_cast<int>(s.size());
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("string labels are dense-coded by first appearance") {
  CsvOptions opts;
  opts.label_column = "last";
  const Dataset d = parse("1,2,a\n3,4,b\n5,6,a\n", opts);
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  REQUIRE(d.truth);
  CHECK(std::vector<int>(d.truth->values().begin(), d.truth->values().end()) ==
        std::vector<int>{1, 2, 1});
  CHECK(d.truth->k() == 2);
  CHECK(d.samples(2, 0) == 5.0);
}

TEST_CASE("header is detected and label column can be named") {
  CsvOptions opts;
  opts.label_column = "cls";
  const Dataset d = parse("cls,x,y\nb,1,2\na,3,4\n", opts);
  CHECK(d.size() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"x", "y"});
  CHECK(d.class_names == std::vector<std::string>{"b", "a"});
  CHECK(d.samples(1, 1) == 4.0);
}

TEST_CASE("malformed input is reported with its position") {
  SUBCASE("ragged row") {
    try {
      parse("1,2\n3\n");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("non-numeric feature") {
    try {
      parse("1,2\n3,x\n");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      CHECK(msg.find("column") != std::string::npos);
    }
  }
  SUBCASE("empty file") { CHECK_THROWS_AS(parse(""), DataError); }
}

TEST_CASE("bundled Iris fixture has the expected shape") {
  CsvOptions opts;
  opts.has_truth = true;
  const Dataset d = load_csv(PLANECLUST_DATA_DIR "/iris.csv", opts);
  CHECK(d.size() == 150);
  CHECK(d.dim() == 4);
  CHECK(d.truth->k() == 3);
}

TEST_CASE("csv round trip preserves samples and labels") {
  Dataset d;
  d.samples.resize(3, 2);
  d.samples << 0.1, 1.0 / 3.0, -2.5e-7, 1e10, 3.14159265358979, -0.0;
  d.truth = Labels({2, 1, 2}, 2);
  std::ostringstream out;
  write_csv(out, d);
  CsvOptions opts;
  opts.has_truth = true;
  const Dataset back = parse(out.str(), opts);
  CHECK(back.samples == d.samples);
  REQUIRE(back.truth);
  // Codes are re-assigned by first appearance, so compare the partition.
  CHECK((*back.truth)[0] == (*back.truth)[2]);
  CHECK((*back.truth)[0] != (*back.truth)[1]);
}

TEST_CASE("label files round trip") {
  const Labels l({3, 1, 2, 3}, 3);
  std::ostringstream out;
  write_labels(out, l);
  CHECK(out.str() == "index,label\n0,3\n1,1\n2,2\n3,3\n");
  std::istringstream in(out.str());
  CHECK(read_labels(in) == std::vector<int>{3, 1, 2, 3});
  std::istringstream bad("0,1\n2,1\n");
  CHECK_THROWS_AS(read_labels(bad), DataError);
}

TEST_CASE("labels outside [1,k] are rejected") {
  CHECK_THROWS_AS(Labels({1, 0}, 2), ConfigError);
  CHECK_THROWS_AS(Labels({1, 3}, 2), ConfigError);
}

TEST_CASE("standardize") {
  Dataset d;
  SUBCASE("minmax maps (1,3,5) to (0,0.5,1)") {
    d.samples = column({1, 3, 5});
    const Dataset s = standardize(d, Scaling::minmax);
    CHECK(s.samples(0, 0) == 0.0);
    CHECK(s.samples(1, 0) == 0.5);
    CHECK(s.samples(2, 0) == 1.0);
  }
  SUBCASE("constant features map to 0") {
    d.samples = column({7, 7});
    CHECK(standardize(d, Scaling::minmax).samples.isZero(0.0));
    CHECK(standardize(d, Scaling::zscore).samples.isZero(0.0));
  }
  SUBCASE("zscore uses the population standard deviation") {
    d.samples = column({0, 2});
    const Dataset s = standardize(d, Scaling::zscore);
    CHECK(s.samples(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(s.samples(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("none is the identity") {
    d.samples = column({-3, 8});
    CHECK(standardize(d, Scaling::none).samples == d.samples);
  }
  SUBCASE("minmax output stays in [0,1] on real data") {
    CsvOptions opts;
    opts.has_truth = true;
    const Dataset w = standardize(load_csv(PLANECLUST_DATA_DIR "/wine.csv", opts), Scaling::minmax);
    CHECK(w.samples.minCoeff() >= 0.0);
    CHECK(w.samples.maxCoeff() <= 1.0);
  }
  CHECK_THROWS_AS(parse_scaling("unit"), ConfigError);
}

TEST_CASE("split_cluster") {
  Eigen::MatrixXd x(4, 2);
  x << 0.5, -2, 1, 1, 2, 2, 3, 3;
  const Labels l({1, 2, 1, 2}, 2);
  const ClusterSplit s = split_cluster(x, l, 1);
  CHECK(s.within_index == std::vector<Index>{0, 2});
  CHECK(s.others_index == std::vector<Index>{1, 3});
  CHECK(s.within.col(0) == Eigen::Vector3d(0.5, -2, 1));
  CHECK(s.within.row(2).isOnes(0.0));
  CHECK(s.others.row(2).isOnes(0.0));

  const ClusterSplit empty = split_cluster(x, Labels({1, 1, 1, 1}, 2), 2);
  CHECK(empty.within.rows() == 3);
  CHECK(empty.within_count() == 0);
  CHECK(empty.others_count() == 4);
}

TEST_CASE("nng_init") {
  SUBCASE("well separated pairs form the clusters") {
    Eigen::MatrixXd x(4, 2);
    x << 0, 0, 9, 9, 0.1, 0, 9.1, 9;
    const Labels l = nng_init(x, 2, 0);
    CHECK(l[0] == l[2]);
    CHECK(l[1] == l[3]);
    CHECK(l[0] != l[1]);
  }
  SUBCASE("k = m gives singletons and k = 1 a single cluster") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 3);
    CHECK(count_distinct(nng_init(x, 7, 0)) == 7);
    const Labels one = nng_init(x, 1, 0);
    for (Index j = 0; j < 7; ++j) CHECK(one[j] == 1);
  }
  SUBCASE("always exactly k clusters, deterministic") {
    std::srand(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd x = Eigen::MatrixXd::Random(25, 2);
      for (int k = 1; k <= 8; ++k) {
        const Labels a = nng_init(x, k, 5);
        CHECK(count_distinct(a) == k);
        CHECK(a == nng_init(x, k, 5));
      }
    }
  }
  CHECK_THROWS_AS(nng_init(Eigen::MatrixXd::Zero(2, 1), 3, 0), ConfigError);
}

TEST_CASE("random_init") {
  const Labels a = random_init(30, 4, 7);
  CHECK(a == random_init(30, 4, 7));
  CHECK(count_distinct(a) == 4);
  CHECK(count_distinct(random_init(6, 6, 1)) == 6);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(count_distinct(random_init(5, 4, seed)) == 4);
  }
  CHECK_THROWS_AS(random_init(2, 3, 0), ConfigError);
}

}  // TEST_SUITE
