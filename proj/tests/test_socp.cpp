#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ded2d/conic.hpp"

using namespace ded2d;
using conic::ConeKind;
using conic::ConicProgram;
using conic::SolveStatus;

namespace {

ConicProgram make_program(int nvars) {
    ConicProgram p;
    p.num_vars = nvars;
    p.objective = Eigen::VectorXd::Zero(nvars);
    return p;
}

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
    Eigen::MatrixXd m(r.size(), r.begin()->size());
    int i = 0;
    for (const auto& row : r) {
        int j = 0;
        for (double v : row)
            m(i, j++) = v;
        ++i;
    }
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(v.size());
    int i = 0;
    for (double e : v)
        x(i++) = e;
    return x;
}

} // namespace

TEST_CASE("soc: minimize x subject to ||(1,1)|| <= x") {
    // maximize -x, cone (x, 1, 1)
    auto p = make_program(1);
    p.objective(0) = -1.0;
    p.add_block(ConeKind::Soc, rows({{1.0}, {0.0}, {0.0}}), vec({0.0, 1.0, 1.0}), "analytic");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("rotated cone: minimize u+v subject to 2uv >= 2") {
    auto p = make_program(2);
    p.objective = vec({-1.0, -1.0});
    p.add_block(ConeKind::RotatedSoc, rows({{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}),
                vec({0.0, 0.0, std::numbers::sqrt2}), "analytic");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lp corner") {
    auto p = make_program(2);
    p.objective = vec({1.0, 1.0});
    p.add_block(ConeKind::NonNeg, rows({{-1.0, 0.0}, {0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}),
                vec({3.0, 4.0, 0.0, 0.0}), "box");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(7.0).epsilon(1e-7));
}

TEST_CASE("linear functional over the unit ball") {
    auto p = make_program(2);
    p.objective = vec({3.0, 4.0});
    Eigen::MatrixXd A(3, 2);
    A << 0, 0, 1, 0, 0, 1;
    p.add_block(ConeKind::Soc, A, vec({1.0, 0.0, 0.0}), "ball");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(sol.x(0) == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("projection distance with bound constraints") {
    // minimize t s.t. ||x - (1,2)|| <= t, x >= (2,3): t* = sqrt(2)
    auto p = make_program(3); // x1 x2 t
    p.objective = vec({0.0, 0.0, -1.0});
    p.add_block(ConeKind::Soc, rows({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}), vec({0.0, -1.0, -2.0}),
                "dist");
    p.add_block(ConeKind::NonNeg, rows({{1, 0, 0}, {0, 1, 0}}), vec({-2.0, -3.0}), "bounds");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(-sol.objective == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("fixed rotated cone head") {
    // maximize w s.t. 2uv >= w^2 with u = 2, v = 1/2 pinned by equalities
    auto p = make_program(3); // u v w
    p.objective = vec({0.0, 0.0, 1.0});
    p.add_block(ConeKind::Zero, rows({{1, 0, 0}, {0, 1, 0}}), vec({-2.0, -0.5}), "pin");
    p.add_block(ConeKind::RotatedSoc, Eigen::MatrixXd::Identity(3, 3), vec({0.0, 0.0, 0.0}),
                "rsoc");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("quadratic through epigraph: min x^2+y^2 on x+y=2") {
    auto p = make_program(3); // x y q
    p.objective = vec({0.0, 0.0, -1.0});
    p.add_block(ConeKind::Zero, rows({{1, 1, 0}}), vec({-2.0}), "sum");
    p.add_block(ConeKind::RotatedSoc, rows({{0, 0, 1}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}}),
                vec({0.0, 0.5, 0.0, 0.0}), "epi");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x(2) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("epigraph max-min") {
    // maximize s s.t. s <= 1-x, s <= 1+x
    auto p = make_program(2); // x s
    p.objective = vec({0.0, 1.0});
    p.add_block(ConeKind::NonNeg, rows({{-1, -1}, {1, -1}}), vec({1.0, 1.0}), "min");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("infeasible box is reported") {
    auto p = make_program(1);
    p.objective = vec({1.0});
    p.add_block(ConeKind::NonNeg, rows({{1.0}, {-1.0}}), vec({-1.0, 0.0}), "x>=1, x<=0");
    auto sol = conic::solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded ray is reported") {
    auto p = make_program(1);
    p.objective = vec({1.0});
    p.add_block(ConeKind::NonNeg, rows({{1.0}}), vec({0.0}), "x>=0");
    auto sol = conic::solve(p);
    CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("hyperbolic reciprocal epigraph") {
    // minimize u + t s.t. u*t >= 4 (u,t >= 0): optimum u=t=2, value 4
    auto p = make_program(2);
    p.objective = vec({-1.0, -1.0});
    p.add_block(ConeKind::RotatedSoc, rows({{1, 0}, {0, 0.5}, {0, 0}}), vec({0.0, 0.0, 2.0}),
                "ut>=4");
    auto sol = conic::solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(-sol.objective == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("dump round trips through a stream") {
    auto p = make_program(2);
    p.objective = vec({1.0, 0.0});
    p.add_block(ConeKind::NonNeg, rows({{-1.0, 0.0}}), vec({1.0}), "cap");
    std::ostringstream os;
    p.dump(os);
    CHECK(os.str().find("conic_program v1") != std::string::npos);
    CHECK(os.str().find("cap") != std::string::npos);
}

TEST_CASE("determinism: identical program, identical iterates") {
    auto p = make_program(2);
    p.objective = vec({3.0, 4.0});
    Eigen::MatrixXd A(3, 2);
    A << 0, 0, 1, 0, 0, 1;
    p.add_block(ConeKind::Soc, A, vec({1.0, 0.0, 0.0}), "ball");
    auto a = conic::solve(p);
    auto b = conic::solve(p);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}
