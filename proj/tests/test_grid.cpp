#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "stableop/errors.hpp"
#include "stableop/grid.hpp"

using namespace stableop;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/stableop_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("geometry conventions") {
    auto g = GridGeometry::line(-1.0, 1.0, 5);
    CHECK(g.h[0] == doctest::Approx(0.5));
    CHECK(g.coord(0, 4) == doctest::Approx(1.0));
    auto f = GridGeometry::fft_line(-1.0, 1.0, 4);
    CHECK(f.h[0] == doctest::Approx(0.5));
    CHECK(f.coord(0, 3) == doctest::Approx(0.5));  // half-open: right endpoint excluded
    auto b = GridGeometry::box({-1.0, -2.0}, {1.0, 2.0}, {5, 9});
    CHECK(b.size() == 45);
    CHECK(b.index(1, 2) == 11);
    CHECK(b.node(4, 8)[1] == doctest::Approx(2.0));
  }

  TEST_CASE("linear interpolation reproduces affine fields") {
    auto g = GridGeometry::box({-1.0, -1.0}, {1.0, 1.0}, {21, 21});
    GridFunction u(g, [](const Vec3& x) { return 2.0 + 3.0 * x[0] - 0.5 * x[1]; });
    CHECK(u.eval({0.137, -0.482, 0.0}) ==
          doctest::Approx(2.0 + 3.0 * 0.137 + 0.5 * 0.482).epsilon(1e-13));
    CHECK(u.eval({-1.0, 1.0, 0.0}) == doctest::Approx(-1.5).epsilon(1e-13));
  }

  TEST_CASE("zero extension outside the hull") {
    auto g = GridGeometry::line(-1.0, 1.0, 11);
    GridFunction u(g, [](const Vec3&) { return 1.0; });
    CHECK(u.eval({1.5, 0.0, 0.0}) == 0.0);
    CHECK(u.eval({0.5, 0.0, 0.0}) == 1.0);
  }

  TEST_CASE("callable extension outside the hull") {
    auto g = GridGeometry::line(-1.0, 1.0, 11);
    GridFunction u(g, [](const Vec3& x) { return x[0] * x[0]; });
    u.set_extension([](const Vec3& x) { return x[0] * x[0]; });
    CHECK(u.eval({2.5, 0.0, 0.0}) == doctest::Approx(6.25));
    CHECK(u.at_ext(11) == doctest::Approx(1.44));  // node just past the right edge
  }

  TEST_CASE("cubic interpolation reproduces quadratics away from edges") {
    auto g = GridGeometry::box({-2.0, -2.0}, {2.0, 2.0}, {41, 41});
    GridFunction u(g, [](const Vec3& x) {
      return 1.0 + x[0] - 2.0 * x[1] + 0.7 * x[0] * x[0] + 0.3 * x[0] * x[1] -
             1.1 * x[1] * x[1];
    });
    auto exact = [](double a, double b) {
      return 1.0 + a - 2.0 * b + 0.7 * a * a + 0.3 * a * b - 1.1 * b * b;
    };
    CHECK(u.eval_cubic({0.33, -0.77, 0.0}) == doctest::Approx(exact(0.33, -0.77)).epsilon(1e-12));
    CHECK(u.eval_cubic({-1.01, 0.49, 0.0}) == doctest::Approx(exact(-1.01, 0.49)).epsilon(1e-12));
  }

  TEST_CASE("csv round trip 1-D") {
    TempFile tf("rt1.csv");
    auto g = GridGeometry::line(-2.0, 2.0, 17);
    GridFunction u(g, [](const Vec3& x) { return std::sin(x[0]) + 1e-17; });
    write_csv(tf.path, u);
    GridFunction v = read_csv(tf.path);
    REQUIRE(v.geometry().pts[0] == 17);
    CHECK(v.geometry().n == 1);
    for (int i = 0; i < 17; ++i) CHECK(v.at(i) == u.at(i));  // 17 digits round-trip exactly
  }

  TEST_CASE("csv round trip 2-D with header") {
    TempFile tf("rt2.csv");
    auto g = GridGeometry::box({0.0, -1.0}, {1.0, 1.0}, {5, 7});
    GridFunction u(g, [](const Vec3& x) { return x[0] * 10.0 + x[1]; });
    write_csv(tf.path, u);
    std::ifstream in(tf.path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,value");
    GridFunction v = read_csv(tf.path);
    REQUIRE(v.geometry().n == 2);
    CHECK(v.geometry().pts[1] == 7);
    CHECK(v.at(3, 4) == u.at(3, 4));
  }

  TEST_CASE("csv reader accepts shuffled rows and rejects holes") {
    TempFile tf("shuf.csv");
    {
      std::ofstream out(tf.path);
      out << "x1,value\n2,20\n0,0\n1,10\n";
    }
    GridFunction v = read_csv(tf.path);
    CHECK(v.at(1) == doctest::Approx(10.0));
    {
      std::ofstream out(tf.path);
      out << "x1,value\n0,0\n1,10\n3,30\n";
    }
    CHECK_THROWS_AS(read_csv(tf.path), ConfigError);
  }

  TEST_CASE("csv reader rejects malformed input") {
    TempFile tf("bad.csv");
    {
      std::ofstream out(tf.path);
      out << "value,x1\n0,0\n";
    }
    CHECK_THROWS_AS(read_csv(tf.path), ConfigError);
    {
      std::ofstream out(tf.path);
      out << "x1,value\n0,zero\n1,1\n";
    }
    CHECK_THROWS_AS(read_csv(tf.path), ConfigError);
  }

  TEST_CASE("extra value columns") {
    TempFile tf("cols.csv");
    auto g = GridGeometry::line(0.0, 1.0, 3);
    std::vector<double> a{1.0, 2.0, 3.0}, b{0.1, 0.2, 0.3};
    write_csv_columns(tf.path, g, {"Lu", "err_bound"}, {&a, &b});
    std::ifstream in(tf.path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,Lu,err_bound");
  }
}
