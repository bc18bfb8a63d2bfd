#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "meqroute/simplex.hpp"

using namespace meq;

TEST_CASE("tiny LP picks the cheap variable") {
    // min x + 2y  s.t. x + y = 1
    LpResult r = solve_equality_lp({{1.0, 1.0}}, {1.0}, {1.0, 2.0});
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(0.0));
    CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("redundant rows are tolerated") {
    LpResult r = solve_equality_lp({{1.0, 1.0}, {1.0, 1.0}}, {1.0, 1.0}, {3.0, 1.0});
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("inconsistent rows are infeasible") {
    LpResult r = solve_equality_lp({{1.0, 1.0}, {1.0, 1.0}}, {1.0, 2.0}, {1.0, 1.0});
    CHECK(r.status == LpResult::Status::infeasible);
}

TEST_CASE("negative rhs rows are normalized") {
    // -x - y = -1 is x + y = 1
    LpResult r = solve_equality_lp({{-1.0, -1.0}}, {-1.0}, {1.0, 2.0});
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.x[0] == doctest::Approx(1.0));
}

TEST_CASE("unbounded problems are reported") {
    // min -x s.t. x - y = 0: x = y can grow without bound
    LpResult r = solve_equality_lp({{1.0, -1.0}}, {0.0}, {-1.0, 0.0});
    CHECK(r.status == LpResult::Status::unbounded);
}

TEST_CASE("transportation instance solves to the known optimum") {
    // two sources (supply 3, 2), two sinks (demand 2, 3), costs:
    //   c(s1,d1)=1 c(s1,d2)=4
    //   c(s2,d1)=6 c(s2,d2)=2
    // vars: x11 x12 x21 x22
    std::vector<std::vector<double>> A{
        {1, 1, 0, 0},  // supply s1
        {0, 0, 1, 1},  // supply s2
        {1, 0, 1, 0},  // demand d1
        {0, 1, 0, 1},  // demand d2 (redundant with the rest)
    };
    std::vector<double> b{3, 2, 2, 3};
    std::vector<double> c{1, 4, 6, 2};
    LpResult r = solve_equality_lp(A, b, c);
    REQUIRE(r.status == LpResult::Status::optimal);
    // optimal: x11=2, x12=1, x22=2 -> 2 + 4 + 4 = 10
    CHECK(r.objective == doctest::Approx(10.0));
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(r.x[2] == doctest::Approx(0.0));
    CHECK(r.x[3] == doctest::Approx(2.0));
}

TEST_CASE("degenerate equality systems stay exact") {
    // x1 + x2 = 1, x2 + x3 = 1, x1 + x3 = 1 has the unique solution (.5,.5,.5)
    std::vector<std::vector<double>> A{{1, 1, 0}, {0, 1, 1}, {1, 0, 1}};
    LpResult r = solve_equality_lp(A, {1, 1, 1}, {1, 1, 1});
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.x[0] == doctest::Approx(0.5));
    CHECK(r.x[1] == doctest::Approx(0.5));
    CHECK(r.x[2] == doctest::Approx(0.5));
}
