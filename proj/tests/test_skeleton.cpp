#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hpt/skeleton.hpp"
#include "oracles.hpp"

using namespace hpt;

namespace {

CoefficientBlock random_block(const GeometryKind& kind, int n, uint64_t seed) {
    CoefficientBlock c = CoefficientBlock::zeros(kind, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    const int step = kind.family == GeometryKind::Family::Disk ? 2 : 1;
    for (size_t col = 0; col < c.num_columns(); ++col) {
        int m = std::abs(CoefficientBlock::column_order(kind, col));
        for (int l = m; l <= n; l += step) c.values(static_cast<size_t>(l), col) = dist(rng);
    }
    return c;
}

double rel_diff(const CoefficientBlock& a, const CoefficientBlock& b) {
    double dn = 0.0, nn = 0.0;
    for (size_t i = 0; i < a.values.storage().size(); ++i) {
        double d = a.values.storage()[i] - b.values.storage()[i];
        dn += d * d;
        nn += b.values.storage()[i] * b.values.storage()[i];
    }
    return std::sqrt(dn) / std::max(std::sqrt(nn), 1e-300);
}

} // namespace

TEST_CASE("plan structure and counts") {
    auto kind = GeometryKind::sphere();
    TransformPlan p82 = build_plan(kind, 8, 2);
    CHECK(p82.num_blocks() == 4);
    CHECK(p82.nodes.size() == 6);  // 3 per parity family
    CostReport r = cost_report(p82);
    CHECK(r.decompositions_per_parity == 3);
    CHECK(r.path_bound == 2);
    CHECK(r.max_path_length <= r.path_bound);

    TransformPlan single = build_plan(kind, 8, 8);
    CHECK(single.nodes.empty());
    CHECK(cost_report(single).decomposition_count == 0);

    CHECK_THROWS_AS(build_plan(kind, 8, 10), domain_error);
    CHECK_THROWS_AS(build_plan(kind, 0, 2), domain_error);
    CHECK_THROWS_AS(build_plan(kind, 8, 3), domain_error);  // parity alignment

    // auto policy: b = round(sqrt(n)) and even for sphere
    TransformPlan pauto = build_plan(kind, 64, 0);
    CHECK(pauto.block == 8);
    TransformPlan pauto2 = build_plan(kind, 30, 0);
    CHECK(pauto2.block % 2 == 0);

    // triangle blocks may be odd
    TransformPlan ptri = build_plan(GeometryKind::triangle(0, 0, 0), 9, 3);
    CHECK(ptri.nodes.size() == 2);

    // non-power-of-two block count: count is still nblocks - 1 per parity
    TransformPlan p12 = build_plan(kind, 24, 4);  // 6 blocks
    CHECK(cost_report(p12).decompositions_per_parity == 5);
    CHECK(cost_report(p12).max_path_length <= cost_report(p12).path_bound);
}

TEST_CASE("hand-counted givens rotations for a small sphere plan") {
    // n = 4, all-Givens: layers 2,3,4 need 3, 2, 1+3 rotations; x2 for the +- columns
    auto kind = GeometryKind::sphere();
    TransformPlan plan = build_plan(kind, 4, 4);
    CostReport r = cost_report(plan);
    CHECK(r.all_givens_rotations == 18);
    CHECK(r.givens_rotations == 18);  // single block: the skeleton path is the pure chain
}

TEST_CASE("precompute is idempotent and ledgered") {
    auto kind = GeometryKind::sphere();
    TransformPlan plan = build_plan(kind, 24, 8);
    precompute(plan);
    CHECK(plan.precomputed);
    size_t bytes = plan.ledger.storage_bytes;
    size_t expect = 0;
    for (const auto& node : plan.nodes)
        expect += 8 * (node.dec.eigenvalues.size() + node.dec.U.rows() * node.dec.U.cols());
    CHECK(bytes == expect);
    std::vector<double> snapshot(plan.nodes[0].dec.U.storage());
    precompute(plan);  // no-op
    CHECK(plan.nodes[0].dec.U.storage() == snapshot);
}

TEST_CASE("round trip and route equivalence per geometry") {
    struct Case {
        GeometryKind kind;
        int n, b;
    };
    for (const Case& c : {Case{GeometryKind::sphere(), 32, 8},
                          Case{GeometryKind::disk(), 32, 8},
                          Case{GeometryKind::triangle(0.0, 0.5, 1.0), 24, 5},
                          Case{GeometryKind::sphere(), 17, 4},
                          Case{GeometryKind::disk(), 33, 6},
                          Case{GeometryKind::triangle(1.0, 0.0, 0.0), 13, 1}}) {
        TransformPlan plan = build_plan(c.kind, c.n, c.b);
        precompute(plan);
        CoefficientBlock x = random_block(c.kind, c.n, 99);
        CoefficientBlock base = execute(plan, x, Direction::ToBase);
        CoefficientBlock back = execute(plan, base, Direction::FromBase);
        CHECK(rel_diff(back, x) <= 1e-10);

        // norm preservation column by column (composition of isometries)
        double nx = 0.0, nb = 0.0;
        for (double v : x.values.storage()) nx += v * v;
        for (double v : base.values.storage()) nb += v * v;
        CHECK(std::abs(std::sqrt(nb) - std::sqrt(nx)) <= 1e-10 * std::sqrt(nx));

        // all-Givens reference path
        TransformPlan givens = build_plan(c.kind, c.n, c.n);
        CoefficientBlock viag = execute(givens, x, Direction::ToBase);
        CHECK(rel_diff(base, viag) <= 1e-10);

        // zero in, zero out, exactly
        CoefficientBlock z = CoefficientBlock::zeros(c.kind, c.n);
        CoefficientBlock zb = execute(plan, z, Direction::ToBase);
        for (double v : zb.values.storage()) CHECK(v == 0.0);
    }
}

TEST_CASE("large round trips at the spec scales") {
    struct Case {
        GeometryKind kind;
        int n;
    };
    for (const Case& c : {Case{GeometryKind::sphere(), 512}, Case{GeometryKind::disk(), 512},
                          Case{GeometryKind::triangle(0.5, 0.0, 1.0), 128}}) {
        TransformPlan plan = build_plan(c.kind, c.n, 0);
        precompute(plan);
        CoefficientBlock x = random_block(c.kind, c.n, 2024);
        CoefficientBlock base = execute(plan, x, Direction::ToBase);
        CoefficientBlock back = execute(plan, base, Direction::FromBase);
        CHECK(rel_diff(back, x) <= 1e-9);
    }
}

TEST_CASE("cached givens toggle is bitwise identical") {
    auto kind = GeometryKind::disk();
    TransformPlan plan = build_plan(kind, 48, 8);
    precompute(plan);
    CoefficientBlock x = random_block(kind, 48, 31);
    CoefficientBlock a = execute(plan, x, Direction::ToBase);
    plan.cache_givens = true;
    CoefficientBlock b = execute(plan, x, Direction::ToBase);
    CHECK(a.values.storage() == b.values.storage());
}

TEST_CASE("execution errors") {
    auto kind = GeometryKind::sphere();
    TransformPlan plan = build_plan(kind, 16, 4);
    CoefficientBlock wrong = CoefficientBlock::zeros(kind, 15);
    CHECK_THROWS_AS(execute(plan, wrong, Direction::ToBase), domain_error);
    CoefficientBlock right = CoefficientBlock::zeros(kind, 16);
    CHECK_THROWS_AS(execute(plan, right, Direction::ToBase), domain_error);  // not precomputed
}

TEST_CASE("determinism across thread counts") {
    auto kind = GeometryKind::sphere();
    TransformPlan plan = build_plan(kind, 40, 8);
    precompute(plan, 3);
    CoefficientBlock x = random_block(kind, 40, 1234);
    CoefficientBlock y1 = execute(plan, x, Direction::ToBase, 1);
    CoefficientBlock y4 = execute(plan, x, Direction::ToBase, 4);
    CHECK(y1.values.storage() == y4.values.storage());  // bitwise

    TransformPlan plan2 = build_plan(kind, 40, 8);
    precompute(plan2, 1);
    CoefficientBlock y2 = execute(plan2, x, Direction::ToBase, 2);
    CHECK(y1.values.storage() == y2.values.storage());
}

TEST_CASE("randomized plan configurations round trip") {
    std::mt19937_64 rng(314159);
    for (int rep = 0; rep < 10; ++rep) {
        int fam = static_cast<int>(rng() % 3);
        GeometryKind kind = fam == 0   ? GeometryKind::sphere()
                            : fam == 1 ? GeometryKind::disk()
                                       : GeometryKind::triangle(0.25 * (rng() % 8), 0.25 * (rng() % 8),
                                                                0.25 * (rng() % 8));
        int n = 9 + static_cast<int>(rng() % 56);
        int stride = kind.family == GeometryKind::Family::Triangle ? 1 : 2;
        int b = stride * (1 + static_cast<int>(rng() % 5));
        if (b > n) b = n;
        CAPTURE(fam);
        CAPTURE(n);
        CAPTURE(b);
        TransformPlan plan = build_plan(kind, n, b);
        precompute(plan);
        CoefficientBlock x = random_block(kind, n, rng());
        CoefficientBlock base = execute(plan, x, Direction::ToBase);
        CoefficientBlock back = execute(plan, base, Direction::FromBase);
        CHECK(rel_diff(back, x) <= 1e-9);
        double nx = 0.0, nb = 0.0;
        for (double v : x.values.storage()) nx += v * v;
        for (double v : base.values.storage()) nb += v * v;
        CHECK(std::abs(std::sqrt(nb) - std::sqrt(nx)) <= 1e-10 * std::sqrt(nx));
    }
}

TEST_CASE("plan serialization round trip") {
    auto kind = GeometryKind::triangle(0.25, 0.0, 0.75);
    TransformPlan plan = build_plan(kind, 18, 4);
    precompute(plan);
    std::stringstream buf;
    serialize(plan, buf);
    std::string bytes = buf.str();

    std::stringstream in(bytes);
    TransformPlan loaded = deserialize(in);
    CHECK(loaded.degree == plan.degree);
    CHECK(loaded.block == plan.block);
    CHECK(loaded.kind.gamma == plan.kind.gamma);
    CoefficientBlock x = random_block(kind, 18, 5);
    CoefficientBlock a = execute(plan, x, Direction::ToBase);
    CoefficientBlock b = execute(loaded, x, Direction::ToBase);
    CHECK(a.values.storage() == b.values.storage());  // bitwise identical execution

    // truncation: every prefix must fail, never yield a partial plan
    std::string cut = bytes.substr(0, bytes.size() / 2);
    std::stringstream bad(cut);
    CHECK_THROWS_AS(deserialize(bad), numerical_error);

    // single corrupted payload byte -> checksum failure
    std::string flip = bytes;
    flip[flip.size() / 2] = static_cast<char>(flip[flip.size() / 2] ^ 0x40);
    std::stringstream corrupt(flip);
    CHECK_THROWS_AS(deserialize(corrupt), numerical_error);
}

TEST_CASE("coefficient file round trip") {
    auto kind = GeometryKind::disk();
    CoefficientBlock x = random_block(kind, 12, 77);
    std::stringstream buf;
    write_coefficients(x, buf);
    std::stringstream in(buf.str());
    CoefficientBlock y = read_coefficients(in);
    CHECK(y.degree == x.degree);
    CHECK(y.values.storage() == x.values.storage());

    std::stringstream bad(buf.str().substr(0, 20));
    CHECK_THROWS_AS(read_coefficients(bad), numerical_error);
}

TEST_CASE("column order layout") {
    auto kind = GeometryKind::sphere();
    CHECK(CoefficientBlock::column_order(kind, 0) == 0);
    CHECK(CoefficientBlock::column_order(kind, 1) == 1);
    CHECK(CoefficientBlock::column_order(kind, 2) == -1);
    CHECK(CoefficientBlock::column_order(kind, 3) == 2);
    CHECK(CoefficientBlock::column_order(kind, 4) == -2);
    CHECK(CoefficientBlock::column_count(kind, 8) == 17);
    auto tri = GeometryKind::triangle(0, 0, 0);
    CHECK(CoefficientBlock::column_order(tri, 5) == 5);
    CHECK(CoefficientBlock::column_count(tri, 8) == 9);
}
