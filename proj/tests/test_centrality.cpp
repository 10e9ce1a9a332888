#include <catch2/catch_amalgamated.hpp>

#include "gridattack/centrality.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gridattack;
using Catch::Matchers::WithinAbs;

TEST_CASE("link_degree counts incident links except itself") {
    const GridNetwork path = fixtures::three_bus_path();
    CHECK(link_degree(path, path.branches[0]) == 1);

    const GridNetwork triangle = GridNetwork::build(
        {fixtures::generator(0), fixtures::consumer(1, 1.0), fixtures::consumer(2, 1.0)},
        {fixtures::branch(0, 0, 1, 1.0), fixtures::branch(1, 1, 2, 1.0),
         fixtures::branch(2, 2, 0, 1.0)});
    for (const Branch& br : triangle.branches) CHECK(link_degree(triangle, br) == 2);

    const GridNetwork single = fixtures::two_bus();
    CHECK(link_degree(single, single.branches[0]) == 0);
}

TEST_CASE("score projections isolate degree and current") {
    const GridNetwork net = fixtures::golden_six_bus();
    const FlowState flow = solve_flow(net);

    const std::vector<int> expected_degree = {2, 3, 2, 3, 3, 1};
    for (const LinkScore& s : score_links(net, flow, {1.0, 0.0}))
        CHECK(s.theta == expected_degree[static_cast<std::size_t>(s.branch)]);

    for (const LinkScore& s : score_links(net, flow, {0.0, 1.0}))
        CHECK(s.theta == s.current_mag);

    // combined: degree 3 plus |I| 0.5 at unit weights gives 3.5
    LinkScore probe{.branch = 0, .degree = 3, .current_mag = 0.5};
    CHECK(1.0 * probe.degree + 1.0 * probe.current_mag == 3.5);
}

TEST_CASE("golden fixture ranking is frozen") {
    const GridNetwork net = fixtures::golden_six_bus();
    const FlowState flow = solve_flow(net);
    const std::vector<LinkScore> scores = score_links(net, flow, {1.0, 1.0});
    const std::vector<double> expected_theta = {3.5, 4.5, 3.5, 4.5, 4.0, 2.0};
    for (const LinkScore& s : scores)
        CHECK_THAT(s.theta, WithinAbs(expected_theta[static_cast<std::size_t>(s.branch)], 1e-9));
    CHECK(rank_links(scores) == std::vector<int>{1, 3, 4, 0, 2, 5});
}

TEST_CASE("rank_links breaks ties by ascending branch id") {
    std::vector<LinkScore> scores(3);
    scores[0] = {.branch = 0, .theta = 2.0};
    scores[1] = {.branch = 1, .theta = 5.0};
    scores[2] = {.branch = 2, .theta = 2.0};
    CHECK(rank_links(scores) == std::vector<int>{1, 0, 2});

    for (LinkScore& s : scores) s.theta = 1.0;
    CHECK(rank_links(scores) == std::vector<int>{0, 1, 2});

    CHECK(rank_links({LinkScore{.branch = 0, .theta = 9.0}}) == std::vector<int>{0});
}

TEST_CASE("ranking is invariant under positive weight scaling") {
    Rng rng(83);
    for (int trial = 0; trial < 20; ++trial) {
        const GridNetwork net = oracles::random_connected_grid(rng, 4, 10, 14);
        const FlowState flow = solve_flow(net);
        const double h1 = rng.uniform(-1.0, 1.0);
        const double h2 = rng.uniform(-1.0, 1.0);
        const double c = rng.uniform(0.1, 10.0);
        const auto base = rank_links(score_links(net, flow, {h1, h2}));
        const auto scaled = rank_links(score_links(net, flow, {c * h1, c * h2}));
        CHECK(base == scaled);
    }
}

TEST_CASE("theta is affine in the weights") {
    const GridNetwork net = fixtures::golden_six_bus();
    const FlowState flow = solve_flow(net);
    const auto d = score_links(net, flow, {1.0, 0.0});
    const auto c = score_links(net, flow, {0.0, 1.0});
    const auto mix = score_links(net, flow, {0.3, -0.7});
    for (std::size_t i = 0; i < mix.size(); ++i)
        CHECK_THAT(mix[i].theta, WithinAbs(0.3 * d[i].theta - 0.7 * c[i].theta, 1e-12));
}

TEST_CASE("score_links rejects a mismatched flow") {
    const GridNetwork net = fixtures::golden_six_bus();
    const FlowState other = solve_flow(fixtures::two_bus());
    CHECK_THROWS_AS(score_links(net, other, {1.0, 1.0}), std::invalid_argument);

    std::vector<char> live_n(6, 1);
    std::vector<char> live_l(6, 1);
    live_n[5] = 0;  // node 5 and its link are dead, so the flow is not intact
    live_l[5] = 0;
    const FlowState partial = solve_flow(net, live_n, live_l);
    CHECK_THROWS_AS(score_links(net, partial, {1.0, 1.0}), std::invalid_argument);
}
