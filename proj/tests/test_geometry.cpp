#include <catch2/catch_amalgamated.hpp>

#include "confspace/geometry.hpp"

using namespace confspace;

TEST_CASE("window validation and volume") {
    CHECK_THROWS_AS((Window<1>({1.0}, {1.0})), PreconditionError);
    CHECK_THROWS_AS((Window<2>({0.0, 2.0}, {1.0, 1.0})), PreconditionError);

    Window<2> w({0.0, -1.0}, {2.0, 1.0});
    CHECK(w.volume() == Catch::Approx(4.0));
    CHECK(w.edge(0) == Catch::Approx(2.0));
}

TEST_CASE("window membership is half-open") {
    Window<1> w({0.0}, {1.0});
    CHECK(w.contains({0.0}));
    CHECK(w.contains({0.999}));
    CHECK_FALSE(w.contains({1.0}));
    CHECK_FALSE(w.contains({-0.1}));
}

TEST_CASE("box intersection and bounding box") {
    Window<1> a({0.0}, {1.0}), b({0.5}, {2.0}), c({1.5}, {3.0});
    auto ab = intersect(a, b);
    REQUIRE(ab.has_value());
    CHECK(ab->lower[0] == Catch::Approx(0.5));
    CHECK(ab->upper[0] == Catch::Approx(1.0));
    CHECK_FALSE(intersect(a, c).has_value());

    auto bb = bounding_box(a, c);
    CHECK(bb.lower[0] == Catch::Approx(0.0));
    CHECK(bb.upper[0] == Catch::Approx(3.0));
}

TEST_CASE("containment of boxes is closed") {
    Window<1> w({0.0}, {1.0});
    CHECK(w.contains_box(Window<1>({0.0}, {1.0})));
    CHECK(w.contains_box(Window<1>({0.2}, {0.8})));
    CHECK_FALSE(w.contains_box(Window<1>({-0.1}, {0.5})));
}

TEST_CASE("vector helpers") {
    Point<3> a{1.0, 2.0, 3.0}, b{0.5, 0.0, -1.0};
    CHECK(dot<3>(a, b) == Catch::Approx(-2.5));
    CHECK(norm_sq<3>(b) == Catch::Approx(1.25));
    CHECK(sub<3>(a, b)[2] == Catch::Approx(4.0));
    CHECK(distance_sq<3>(a, a) == 0.0);
}
