#include <gtest/gtest.h>

#include <omp.h>

#include "battery.hpp"
#include "bounds_checks.hpp"

using namespace meshdist;
using namespace meshdist::testing;

namespace {

struct Scene {
    TriangleMesh<double> a, b;
    F12Bvh<double> ba, bb;

    explicit Scene(MeshPair<double> p) : a(std::move(p.first)), b(std::move(p.second)), ba(build_f12(a)), bb(build_f12(b)) {}
    Scene(const std::string& kind, const std::string& params) : Scene(gen_scene<double>(kind, SceneParams::parse(params))) {}

    QueryResult<double> min(const EngineConfig& cfg = sequential()) const { return run_min_query(a, b, ba, bb, cfg); }
    QueryResult<double> max(const EngineConfig& cfg = sequential()) const { return run_max_query(a, b, ba, bb, cfg); }
    QueryContext<double> ctx() const { return {a, b, ba, bb}; }

    static EngineConfig sequential() {
        EngineConfig cfg;
        cfg.threads = 1;
        return cfg;
    }
};

EngineConfig with_threads(int n) {
    EngineConfig cfg;
    cfg.threads = n;
    return cfg;
}

TriangleMesh<double> point_mesh(const V3& p) { return TriangleMesh<double>({p, p, p}, {{0, 1, 2}}); }

// Triangles strung along x, far apart from each other.
TriangleMesh<double> strip(std::size_t n, double spacing) {
    std::vector<V3> v;
    std::vector<TriangleIndices> t;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = spacing * double(i);
        const auto base = std::uint32_t(v.size());
        v.push_back(V3(x, 0, 0));
        v.push_back(V3(x + 0.5, 0, 0));
        v.push_back(V3(x, 0.5, 0));
        t.push_back({base, base + 1, base + 2});
    }
    return TriangleMesh<double>(std::move(v), std::move(t));
}

} // namespace

TEST(AdaptiveDepth, Examples) {
    const EngineConfig cfg;
    EXPECT_EQ(adaptive_depth(1, cfg, 10), 5u);
    EXPECT_EQ(adaptive_depth(100000, cfg, 10), 1u);
    EXPECT_EQ(adaptive_depth(1000, cfg, 2), 2u);
}

TEST(AdaptiveDepth, LargestDepthUnderCap) {
    EngineConfig cfg;
    cfg.depth_cap = 16;
    for (std::size_t n : {1u, 2u, 3u, 15u, 16u, 17u, 255u, 256u, 4095u, 65535u, 65536u, 262143u}) {
        const unsigned k = adaptive_depth(n, cfg, 16);
        if (k > 1) EXPECT_LT((std::uint64_t(1) << (2 * k)) * n, cfg.front_cap) << n;
        if (k < 16) EXPECT_GE((std::uint64_t(1) << (2 * (k + 1))) * n, cfg.front_cap) << n;
    }
}

TEST(ExpandFront, SingleTrianglesGoStraightToNarrowPhase) {
    const Triangle<double> ta{V3(0, 0, 0), V3(1, 0, 0), V3(0, 1, 0)};
    const Triangle<double> tb{V3(2, 2, 1), V3(3, 2, 1), V3(2, 4, 2)};
    const Scene s(MeshPair<double>{single_triangle(ta[0], ta[1], ta[2]), single_triangle(tb[0], tb[1], tb[2])});
    QueryState<QueryKind::Min, double> state(enhanced_min_upper(s.ba.root(), s.bb.root()));
    const std::vector<FrontEntry<double>> front{{0, 0, aabb_min_lower(s.ba.root(), s.bb.root())}};
    const auto out = expand_front<QueryKind::Min, double>(front, 1, state, s.ctx(), Scene::sequential());
    EXPECT_TRUE(out.empty());
    EXPECT_EQ(state.bound(), tri_tri_min(ta, tb).distance);
    EXPECT_EQ(s.min().distance, tri_tri_min(ta, tb).distance);
}

TEST(ExpandFront, SeparatedMeshesCullDescendants) {
    const Scene s("random-blobs", "n=256,nb=256,seed=3,gap=8");
    EngineConfig cfg = Scene::sequential();
    QueryState<QueryKind::Min, double> state(enhanced_min_upper(s.ba.root(), s.bb.root()));
    const std::vector<FrontEntry<double>> root{{0, 0, aabb_min_lower(s.ba.root(), s.bb.root())}};
    IterationStats<double> st;
    const auto lvl3 = expand_front<QueryKind::Min, double>(root, 3, state, s.ctx(), cfg, &st);
    EXPECT_EQ(st.candidates, 64u);
    EXPECT_LT(lvl3.size(), 64u);

    // Against an unculled enumeration of the same level.
    cfg.culling = false;
    QueryState<QueryKind::Min, double> open(enhanced_min_upper(s.ba.root(), s.bb.root()));
    const auto all = expand_front<QueryKind::Min, double>(root, 3, open, s.ctx(), cfg);
    EXPECT_EQ(all.size(), 64u);
    EXPECT_GT(st.culled, 0u);
}

TEST(ExpandFront, EnhancedEmitsSubsetOfConventional) {
    for (const char* params : {"n=300,nb=260,seed=1,gap=0.5", "n=500,nb=500,seed=2,gap=0.3"}) {
        const Scene s("offset-grids", params);
        EngineConfig on = Scene::sequential(), off = Scene::sequential();
        off.enhanced_bounds = false;
        QueryState<QueryKind::Min, double> st_on(enhanced_min_upper(s.ba.root(), s.bb.root()));
        QueryState<QueryKind::Min, double> st_off(aabb_max_upper(s.ba.root(), s.bb.root()));
        std::vector<FrontEntry<double>> f_on{{0, 0, aabb_min_lower(s.ba.root(), s.bb.root())}}, f_off = f_on;
        while (!f_on.empty() && s.ba.remaining_depth(f_on[0].node_a) > 2) {
            f_on = expand_front<QueryKind::Min, double>(f_on, 2, st_on, s.ctx(), on);
            f_off = expand_front<QueryKind::Min, double>(f_off, 2, st_off, s.ctx(), off);
            auto key = [](const FrontEntry<double>& e) { return std::pair(e.node_a, e.node_b); };
            std::set<std::pair<NodeIndex, NodeIndex>> off_set;
            for (const auto& e : f_off) off_set.insert(key(e));
            for (const auto& e : f_on) EXPECT_TRUE(off_set.count(key(e))) << params;
            EXPECT_LE(f_on.size(), f_off.size());
        }
    }
}

TEST(ExpandFront, OverflowIsReported) {
    const Scene s("random-blobs", "n=512,nb=512,seed=1,gap=0");
    EngineConfig cfg = Scene::sequential();
    cfg.max_front_entries = 10;
    cfg.culling = false;
    try {
        s.min(cfg);
        FAIL() << "expected FrontOverflowError";
    } catch (const FrontOverflowError& e) {
        EXPECT_NE(std::string(e.what()).find("10"), std::string::npos) << e.what();
    }
}

TEST(LeafPair, IntersectingTrianglesGiveZero) {
    const Scene s(MeshPair<double>{single_triangle(V3(-1, -1, 0), V3(2, -1, 0), V3(-1, 2, 0)),
                                   single_triangle(V3(0, 0, -1), V3(0.2, 0.1, 1), V3(0.1, 0.3, 1))});
    QueryState<QueryKind::Min, double> state(10.0);
    process_leaf_pair<QueryKind::Min>(0, 0, s.ctx(), state);
    EXPECT_EQ(state.bound(), 0.0);
    ASSERT_TRUE(state.witness());
    EXPECT_EQ(state.witness()->distance, 0.0);
}

TEST(LeafPair, TwoByTwoMeansFourTests) {
    const Scene s("random-blobs", "n=3,nb=3,seed=4");
    auto paired = [](const F12Bvh<double>& bvh) {
        for (std::size_t r = 0; r < bvh.leaf_count(); ++r)
            if (bvh.leaves()[r].count == 2) return bvh.leaf_node(r);
        return NodeIndex(0);
    };
    QueryState<QueryKind::Min, double> state(std::numeric_limits<double>::infinity());
    EXPECT_EQ(process_leaf_pair<QueryKind::Min>(paired(s.ba), paired(s.bb), s.ctx(), state), 4u);
}

TEST(LeafPair, MaxBoundIsMaxOfPairMaxima) {
    const Scene s("random-blobs", "n=2,nb=2,seed=6");
    QueryState<QueryKind::Max, double> state(0.0);
    process_leaf_pair<QueryKind::Max>(1, 1, s.ctx(), state);
    process_leaf_pair<QueryKind::Max>(2, 2, s.ctx(), state);
    const TriangleId a1 = s.ba.leaf_triangles(1)[0], a2 = s.ba.leaf_triangles(2)[0];
    const TriangleId b1 = s.bb.leaf_triangles(1)[0], b2 = s.bb.leaf_triangles(2)[0];
    const double expect = std::max(max_vertex_pair(s.a.triangle(a1), s.b.triangle(b1)), max_vertex_pair(s.a.triangle(a2), s.b.triangle(b2)));
    EXPECT_EQ(state.bound(), expect);
}

TEST(MinQuery, OffsetGridsGap) {
    const Scene s("offset-grids", "n=400,nb=300,seed=3,gap=0.5");
    EXPECT_NEAR(s.min().distance, 0.5, 1e-6);
}

TEST(MinQuery, RandomBlobsMatchOracle) {
    const Scene s("random-blobs", "n=200,seed=1");
    const auto r = s.min();
    const auto bf = brute_force_min(s.a, s.b);
    EXPECT_LE(rel_diff(r.distance, bf.distance), 1e-9);
    // Frozen from an independent all-pairs evaluation outside this library
    // (tests/oracle/tri_dist_oracle.py).
    EXPECT_NEAR(r.distance, kRandomBlobs200Seed1Min, 1e-9);
    ASSERT_TRUE(r.witness);
    EXPECT_NEAR((r.witness->point_a - r.witness->point_b).norm(), r.witness->distance, 1e-12);
    EXPECT_GE(r.witness->distance, r.distance);
}

TEST(MinQuery, IntersectingClustersAreZero) {
    const Scene s("intersecting-clusters", "n=1000,seed=7");
    const auto r = s.min(with_threads(0));
    EXPECT_EQ(r.distance, 0.0);
}

TEST(MaxQuery, PointMeshes) {
    const V3 p(1, -2, 0.5), q(4, 2, 0.5);
    const Scene s(MeshPair<double>{point_mesh(p), point_mesh(q)});
    EXPECT_EQ(s.max().distance, (p - q).norm());
}

TEST(MaxQuery, IdenticalMeshesGiveDiameter) {
    const auto [a, b] = gen_scene<double>("random-blobs", SceneParams::parse("n=300,nb=1,seed=12"));
    const Scene s(MeshPair<double>{a, a});
    double diameter = 0;
    for (const auto& p : a.vertices())
        for (const auto& q : a.vertices()) diameter = std::max(diameter, (p - q).norm());
    EXPECT_EQ(s.max().distance, diameter);
}

TEST(MaxQuery, SideBySideTools) {
    // Two shells side by side, as in a clearance check between parts.
    const Scene s("nested-shells", "n=400,nb=300,seed=2");
    auto b = s.b;
    const auto moved = apply_transform(b, RigidTransform<double>::translation(V3(3.5, 0, 0)));
    const Scene t(MeshPair<double>{s.a, moved});
    EXPECT_EQ(t.max().distance, brute_force_max(t.a, t.b).distance);
    EXPECT_EQ(t.min().distance, brute_force_min(t.a, t.b).distance);
}

TEST(Query, BoundTraceIsMonotone) {
    for (int threads : {1, 4}) {
        const Scene s("random-blobs", "n=400,nb=350,seed=5,gap=1");
        EngineConfig cfg = with_threads(threads);
        cfg.trace_bound = true;
        const auto rmin = s.min(cfg);
        ASSERT_GT(rmin.bound_trace.size(), 1u);
        for (std::size_t i = 1; i < rmin.bound_trace.size(); ++i) EXPECT_LE(rmin.bound_trace[i], rmin.bound_trace[i - 1]);
        EXPECT_EQ(rmin.bound_trace.back(), rmin.distance);
        const auto rmax = s.max(cfg);
        for (std::size_t i = 1; i < rmax.bound_trace.size(); ++i) EXPECT_GE(rmax.bound_trace[i], rmax.bound_trace[i - 1]);
        EXPECT_EQ(rmax.bound_trace.back(), rmax.distance);
    }
}

TEST(Query, ScheduleIndependence) {
    const int max_threads = std::max(4, omp_get_num_procs());
    for (const auto& scene : {std::pair{"random-blobs", "n=500,nb=400,seed=8,gap=2"}, std::pair{"offset-grids", "n=500,seed=9"},
                              std::pair{"nested-shells", "n=500,seed=10"}, std::pair{"intersecting-clusters", "n=500,seed=11"}}) {
        const Scene s(scene.first, scene.second);
        const auto ref_min = s.min(with_threads(1)), ref_max = s.max(with_threads(1));
        for (int threads : {2, 3, max_threads, 0}) {
            EngineConfig cfg = with_threads(threads);
            cfg.front_cap = 4096;  // more iterations, more interleavings
            EXPECT_EQ(s.min(cfg).distance, ref_min.distance) << scene.first << " threads=" << threads;
            EXPECT_EQ(s.max(cfg).distance, ref_max.distance) << scene.first << " threads=" << threads;
            EXPECT_EQ(s.min(with_threads(threads)).distance, ref_min.distance);
        }
    }
}

TEST(Query, SequentialWitnessIsDeterministic) {
    const Scene s("offset-grids", "n=300,nb=300,seed=4");
    const auto r1 = s.min(), r2 = s.min();
    ASSERT_TRUE(r1.witness && r2.witness);
    EXPECT_EQ(r1.witness->tri_a, r2.witness->tri_a);
    EXPECT_EQ(r1.witness->tri_b, r2.witness->tri_b);
}

TEST(Query, ExactWitnessFlag) {
    // Grids have many tied closest pairs; with the flag a witness realizing the
    // distance is always reported.
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Scene s("offset-grids", "n=200,nb=150,seed=" + std::to_string(seed));
        EngineConfig cfg = Scene::sequential();
        cfg.exact_witness = true;
        const auto r = s.min(cfg);
        EXPECT_TRUE(r.witness_exact);
        ASSERT_TRUE(r.witness);
        EXPECT_EQ(r.witness->distance, r.distance);
        EXPECT_EQ(r.distance, s.min().distance);
        EXPECT_TRUE(s.max(cfg).witness_exact);
    }
}

TEST(Query, CullingIsSound) {
    for (const auto& scene : scene_battery()) {
        if (scene.params.find("n=50,") != 0 && scene.params.find("n=90,") != 0) continue;
        const Scene s(scene.make());
        EngineConfig open = Scene::sequential();
        open.culling = false;
        EXPECT_EQ(s.min(open).distance, s.min().distance) << scene.label();
        EXPECT_EQ(s.max(open).distance, s.max().distance) << scene.label();
    }
}

TEST(Query, FrontCapContract) {
    for (std::size_t cap : {std::size_t(64), std::size_t(1000), std::size_t(262144)}) {
        const Scene s("random-blobs", "n=2000,nb=1500,seed=2,gap=1");
        EngineConfig cfg = Scene::sequential();
        cfg.front_cap = cap;
        for (const auto& r : {s.min(cfg), s.max(cfg)}) {
            for (const auto& it : r.iterations) {
                EXPECT_LE(it.k, cfg.depth_cap);
                if (it.k > 1) EXPECT_LT((std::uint64_t(1) << (2 * it.k)) * it.front_in, cap);
            }
            EXPECT_EQ(r.distance, r.kind == QueryKind::Min ? brute_force_min(s.a, s.b).distance : brute_force_max(s.a, s.b).distance);
        }
    }
}

TEST(Query, TemporalSeedKeepsDistance) {
    const Scene s("random-blobs", "n=300,nb=300,seed=21,gap=2");
    const auto r = s.min();
    ASSERT_TRUE(r.witness);
    const auto seeded = run_query<QueryKind::Min>(s.a, s.b, s.ba, s.bb, Scene::sequential(),
                                                  std::pair{r.witness->tri_a, r.witness->tri_b});
    EXPECT_EQ(seeded.distance, r.distance);
}

TEST(Query, MixedDepthTrees) {
    // One tree much deeper than the other, in both argument orders.
    for (std::size_t na : {1u, 2u, 3u, 9u}) {
        const Scene s("random-blobs", "n=" + std::to_string(na) + ",nb=700,seed=" + std::to_string(na) + ",gap=1");
        EXPECT_EQ(s.min().distance, brute_force_min(s.a, s.b).distance) << na;
        EXPECT_EQ(s.max().distance, brute_force_max(s.a, s.b).distance) << na;
        const Scene t(MeshPair<double>{s.b, s.a});
        EXPECT_EQ(t.min().distance, brute_force_min(t.a, t.b).distance) << na;
        EXPECT_EQ(t.max().distance, brute_force_max(t.a, t.b).distance) << na;
    }
}

TEST(Query, InvalidConfigRejected) {
    const Scene s("random-blobs", "n=10,seed=1");
    EngineConfig cfg;
    cfg.front_cap = 3;
    EXPECT_THROW(s.min(cfg), Error);
    cfg = EngineConfig{};
    cfg.depth_cap = 17;
    EXPECT_THROW(s.min(cfg), Error);
    cfg.depth_cap = 0;
    EXPECT_THROW(s.min(cfg), Error);
}

TEST(Query, BvhMeshMismatchRejected) {
    const Scene s("random-blobs", "n=10,nb=12,seed=1");
    EXPECT_THROW(run_min_query(s.a, s.b, s.bb, s.ba, EngineConfig{}), TopologyMismatchError);
}

TEST(Query, SinglePrecision) {
    for (const char* kind : {"random-blobs", "offset-grids", "nested-shells", "intersecting-clusters"}) {
        const auto [a, b] = gen_scene<float>(kind, SceneParams::parse("n=300,nb=250,seed=3"));
        const auto ba = build_f12(a), bb = build_f12(b);
        EngineConfig cfg;
        cfg.precision = Precision::Single;
        const auto rmin = run_min_query(a, b, ba, bb, cfg), rmax = run_max_query(a, b, ba, bb, cfg);
        const double ref_min = brute_force_min(a.cast<double>(), b.cast<double>()).distance;
        const double ref_max = brute_force_max(a.cast<double>(), b.cast<double>()).distance;
        EXPECT_LE(rel_diff(rmin.distance, ref_min), 1e-5) << kind;
        EXPECT_LE(rel_diff(rmax.distance, ref_max), 1e-5) << kind;
        EXPECT_EQ(rmin.distance, brute_force_min(a, b).distance) << kind;
        EXPECT_EQ(rmax.distance, brute_force_max(a, b).distance) << kind;
    }
}

TEST(Dfs, MatchesFrontalEngine) {
    for (const auto& scene : scene_battery()) {
        if (scene.params.find("n=50,") != 0 && scene.params.find("n=150,") != 0) continue;
        const Scene s(scene.make());
        EXPECT_EQ(run_dfs_baseline(s.a, s.b, s.bb, QueryKind::Min, with_threads(1)).distance, s.min().distance) << scene.label();
        EXPECT_EQ(run_dfs_baseline(s.a, s.b, s.bb, QueryKind::Max, with_threads(1)).distance, s.max().distance) << scene.label();
    }
}

TEST(Dfs, VisitsMoreOnIntersectingClusters) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Scene s("intersecting-clusters", "n=1000,seed=" + std::to_string(seed));
        const auto frontal = s.min();
        const auto dfs = run_dfs_baseline(s.a, s.b, s.bb, QueryKind::Min, with_threads(1));
        EXPECT_EQ(dfs.distance, 0.0);
        EXPECT_GE(dfs.bvtt_nodes, frontal.expanded_pairs);
    }
}

TEST(Dfs, SingleTrianglePerfectPruning) {
    const auto b = strip(64, 100.0);
    const auto a = single_triangle(V3(1, 0, 0.5), V3(1.5, 0, 0.5), V3(1, 0.5, 0.5));
    const auto bb = build_f12(b);
    const auto r = run_dfs_baseline(a, b, bb, QueryKind::Min, with_threads(1));
    EXPECT_EQ(r.distance, brute_force_min(a, b).distance);
    EXPECT_LE(r.bvtt_nodes, 2 * bb.depth() + 1);
}

TEST(BruteForce, Examples) {
    const auto t = single_triangle(V3(0, 0, 0), V3(1, 0, 0), V3(0, 1, 0));
    EXPECT_EQ(brute_force_min(t, t).distance, 0.0);
    const Triangle<double> ta{V3(0, 0, 0), V3(1, 0, 0), V3(0, 1, 0)}, tb{V3(3, 3, 3), V3(4, 3, 3), V3(3, 5, 3)};
    const auto m = single_triangle(tb[0], tb[1], tb[2]);
    EXPECT_EQ(brute_force_min(t, m).distance, tri_tri_min(ta, tb).distance);
}

TEST(BruteForce, LexicographicTieBreak) {
    // Every triangle of B is the same distance from the single triangle of A.
    const auto a = single_triangle(V3(0, 0, 0), V3(1, 0, 0), V3(0, 1, 0));
    std::vector<V3> v;
    std::vector<TriangleIndices> t;
    for (int i = 0; i < 4; ++i) {
        const auto base = std::uint32_t(v.size());
        const double z = 2.0;
        v.push_back(V3(0.1 * i, 0.1, z));
        v.push_back(V3(0.1 * i + 0.05, 0.1, z));
        v.push_back(V3(0.1 * i, 0.15, z));
        t.push_back({base, base + 1, base + 2});
    }
    const TriangleMesh<double> b(v, t);
    const auto w = brute_force_min(a, b, false, 4);
    EXPECT_EQ(w.distance, 2.0);
    EXPECT_EQ(w.tri_b, 0u);
}

TEST(BruteForce, SizeGuard) {
    const auto [a, b] = gen_scene<double>("random-blobs", SceneParams::parse("n=3163,nb=3163,seed=1"));
    try {
        brute_force_min(a, b);
        FAIL() << "expected SizeGuardError";
    } catch (const SizeGuardError& e) {
        EXPECT_NE(std::string(e.what()).find("10004569"), std::string::npos) << e.what();
    }
    const auto [c, d] = gen_scene<double>("random-blobs", SceneParams::parse("n=2500,nb=4000,seed=1"));
    EXPECT_NO_THROW(brute_force_max(c, d, false, 0));  // exactly at the limit
}
