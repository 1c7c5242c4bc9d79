#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>

#include "logsynth/error.hpp"
#include "logsynth/generation.hpp"
#include "logsynth/synthetic.hpp"
#include "logsynth/text.hpp"
#include "oracles.hpp"

using namespace logsynth;
namespace fs = std::filesystem;

namespace {

struct World {
  Analysis a;
  AnnotationSet ann;
  InfectionMap map;
  std::unique_ptr<GenerationContext> ctx;

  void finish() {
    map = propagate(a.store, ann);
    ctx = std::make_unique<GenerationContext>(a.model, a.cg, a.pruned, a.store, map, ann);
  }
  MethodId id(const std::string& name) const { return *a.model.find_method(name); }
};

void datanode(World& w, bool annotated = true) {
  oracle::analyze_text(read_file(oracle::fixture("datanode.ml")), w.a);
  if (annotated) w.ann = import_annotations(oracle::fixture("datanode.ann"), w.a.store, w.a.model);
  w.finish();
}

void cluster(World& w) {
  oracle::analyze_text(read_file(oracle::fixture("cluster.ml")), w.a);
  w.ann = auto_annotate(w.a.store, 10, 1);
  w.finish();
}

void synthetic(World& w, std::size_t methods, std::uint64_t seed, double recursion = 0.0, std::size_t seeds = 3) {
  SyntheticOptions o;
  o.methods = methods;
  o.seed = seed;
  o.recursion_rate = recursion;
  oracle::analyze_methods(synthetic_program(o), w.a);
  w.ann = auto_annotate(w.a.store, seeds, seed);
  w.finish();
}

GenParams params(std::size_t size, double rate, std::uint64_t seed = 1) {
  GenParams p;
  p.size = size;
  p.anomaly_rate = rate;
  p.seed = seed;
  return p;
}

std::vector<EventId> walk(const World& w, const std::string& entry, Label mode, std::uint64_t seed,
                          std::uint32_t reps = 1) {
  GenParams p;
  p.max_loop_reps = reps;
  Rng rng = make_rng(seed, 0);
  return generate_sequence(*w.ctx, w.id(entry), mode, rng, p).events;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("logsynth_gen_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  Rng a = make_rng(5, 0), b = make_rng(5, 0), c = make_rng(5, 1), d = make_rng(6, 0);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Rng, UniformBelowCoversRange) {
  Rng rng = make_rng(3, 3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = uniform_below(rng, 7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  for (int n : seen) EXPECT_GT(n, 800);
  EXPECT_EQ(uniform_below(rng, 1), 0u);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform_unit(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Params, Validation) {
  GenParams p;
  p.validate();
  p.size = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.anomaly_rate = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.anomaly_rate = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.max_loop_reps = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.component = "";
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Plan, LoopRegions) {
  LogEp ep;
  ep.steps = {Step::log(0).start(), Step::call(1).end(), Step::log(2)};
  const auto plan = make_plan(ep);
  using C = GenerationContext;
  EXPECT_EQ(plan.tokens, (std::vector<std::int32_t>{C::kOpen, 0, 1, C::kClose, 2}));
  EXPECT_EQ(plan.match[0], 3u);

  LogEp stray;
  stray.steps = {Step::log(0).end(), Step::log(1).start()};
  const auto p2 = make_plan(stray);
  EXPECT_EQ(p2.tokens, (std::vector<std::int32_t>{0, C::kOpen, 1, C::kClose}));
}

TEST(Walk, DatanodeNormalFromA) {
  World w;
  datanode(w);
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(walk(w, "methodA", Label::kNormal, s), (std::vector<EventId>{0, 1}));
  }
}

TEST(Walk, DatanodeAnomalyFromA) {
  World w;
  datanode(w);
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(walk(w, "methodA", Label::kAnomaly, s), (std::vector<EventId>{0, 2, 3}));
  }
}

TEST(Walk, DatanodeFromB) {
  World w;
  datanode(w);
  EXPECT_EQ(walk(w, "methodB", Label::kNormal, 1), std::vector<EventId>{1});
  EXPECT_THROW(walk(w, "methodB", Label::kAnomaly, 1), UnreachableSeedError);
}

TEST(Walk, DatanodeLoopRepetitions) {
  World w;
  datanode(w);
  std::set<std::size_t> ks;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto ev = walk(w, "methodA", Label::kNormal, s, 3);
    ASSERT_EQ(ev.size() % 2, 0u);
    const std::size_t k = ev.size() / 2;
    ASSERT_GE(k, 1u);
    ASSERT_LE(k, 3u);
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_EQ(ev[2 * i], 0u);
      EXPECT_EQ(ev[2 * i + 1], 1u);
    }
    ks.insert(k);
  }
  EXPECT_EQ(ks, (std::set<std::size_t>{1, 2, 3}));
}

TEST(Walk, DatanodeLanguageMatchesOracle) {
  World w;
  datanode(w);
  GenParams p;
  p.max_loop_reps = 3;
  const auto lang = oracle::walk_language(w.a.store, w.map, w.id("methodA"), 3, 1);
  std::set<oracle::Walk> normal_seen, anomaly_seen;
  for (std::uint64_t s = 0; s < 400; ++s) {
    for (Label mode : {Label::kNormal, Label::kAnomaly}) {
      Rng rng = make_rng(s, 0);
      WalkTrace trace;
      const auto seq = generate_sequence(*w.ctx, w.id("methodA"), mode, rng, p, &trace);
      const oracle::Walk got{seq.events, trace.seeds_hit > 0};
      ASSERT_TRUE(lang.count(got));
      EXPECT_EQ(got.seed, mode == Label::kAnomaly);
      (mode == Label::kNormal ? normal_seen : anomaly_seen).insert(got);
    }
  }
  // Every clean walk from A that starts with a loop iteration is produced.
  std::size_t clean_nonempty = 0;
  for (const auto& x : lang) clean_nonempty += !x.seed && !x.events.empty();
  EXPECT_EQ(normal_seen.size(), clean_nonempty);
  EXPECT_GT(anomaly_seen.size(), 1u);
}

TEST(Walk, TracesReplayOnSyntheticPrograms) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    World w;
    synthetic(w, 80, seed, seed % 3 == 0 ? 0.2 : 0.0);
    GenParams p = params(150, 0.2, seed);
    p.max_recursion_depth = static_cast<std::uint32_t>(seed % 3);
    std::vector<WalkTrace> traces;
    const LogDataset ds = generate_dataset(*w.ctx, p, 2, &traces);
    ASSERT_EQ(traces.size(), ds.sequences.size());
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
      const auto err = oracle::check_sequence(*w.ctx, ds.sequences[i], traces[i], p);
      ASSERT_EQ(err, "") << "program " << seed << " sequence " << i;
    }
  }
}

TEST(Walk, SmallProgramsStayInsideWalkLanguage) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    World w;
    SyntheticOptions o;
    o.methods = 8;
    o.levels = 3;
    o.seed = seed;
    o.recursion_rate = 0.25;
    oracle::analyze_methods(synthetic_program(o), w.a);
    w.ann = auto_annotate(w.a.store, 2, seed);
    w.finish();
    GenParams p;
    p.max_loop_reps = 2;
    for (MethodId entry : w.ctx->default_entries()) {
      std::set<oracle::Walk> lang;
      try {
        lang = oracle::walk_language(w.a.store, w.map, entry, 2, 1, 20000);
      } catch (const std::runtime_error&) {
        continue;
      }
      for (std::uint64_t s = 0; s < 30; ++s) {
        for (Label mode : {Label::kNormal, Label::kAnomaly}) {
          Rng rng = make_rng(s, entry);
          WalkTrace trace;
          LogSequence seq;
          try {
            seq = generate_sequence(*w.ctx, entry, mode, rng, p, &trace);
          } catch (const ExhaustionError&) {
            continue;
          }
          ASSERT_TRUE(lang.count(oracle::Walk{seq.events, trace.seeds_hit > 0})) << "program " << seed;
          EXPECT_EQ(trace.seeds_hit > 0, mode == Label::kAnomaly);
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 500u);
}

TEST(Walk, EventCapRaises) {
  World w;
  datanode(w);
  GenParams p;
  p.max_loop_reps = 3;
  p.max_events = 1;
  Rng rng = make_rng(0, 0);
  EXPECT_THROW(generate_sequence(*w.ctx, w.id("methodA"), Label::kNormal, rng, p), ExhaustionError);
}

TEST(Walk, RecursionBound) {
  World w;
  oracle::analyze_text("void r() { log(info, \"r\"); if (more) { r(); } }", w.a);
  w.finish();
  for (std::uint32_t depth = 0; depth <= 3; ++depth) {
    GenParams p;
    p.max_recursion_depth = depth;
    std::size_t longest = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng rng = make_rng(s, 0);
      longest = std::max(longest, generate_sequence(*w.ctx, 0, Label::kNormal, rng, p).events.size());
    }
    EXPECT_EQ(longest, depth + 1) << "depth " << depth;
  }
}

TEST(Dataset, ExactAnomalyCount) {
  World w;
  datanode(w);
  GenParams p = params(100, 0.03, 7);
  p.entries = {w.id("methodA")};
  const LogDataset ds = generate_dataset(*w.ctx, p);
  ASSERT_EQ(ds.sequences.size(), 100u);
  EXPECT_EQ(ds.anomaly_count(), 3u);
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) EXPECT_EQ(ds.sequences[i].seq_id, i);
}

TEST(Dataset, ExactRateAcrossSizes) {
  World w;
  synthetic(w, 120, 4);
  for (double rate : {0.0, 0.01, 0.03, 0.25, 0.5, 1.0}) {
    for (std::size_t size : {1u, 7u, 100u, 333u}) {
      GenParams p = params(size, rate, size);
      std::vector<MethodId> reach;
      for (auto m : w.ctx->default_entries()) {
        if (w.ctx->seed_distance(m)) reach.push_back(m);
      }
      if (rate == 1.0) p.entries = reach;
      const LogDataset ds = generate_dataset(*w.ctx, p);
      EXPECT_EQ(ds.anomaly_count(), static_cast<std::size_t>(std::llround(size * rate))) << rate << " " << size;
    }
  }
}

TEST(Dataset, ZeroRateNeverTouchesSeeds) {
  World w;
  synthetic(w, 120, 9);
  GenParams p = params(300, 0.0, 3);
  std::vector<WalkTrace> traces;
  const LogDataset ds = generate_dataset(*w.ctx, p, 1, &traces);
  EXPECT_EQ(ds.anomaly_count(), 0u);
  for (const auto& t : traces) EXPECT_EQ(t.seeds_hit, 0u);
}

TEST(Dataset, InexactRateIsApproximate) {
  World w;
  synthetic(w, 120, 10);
  GenParams p = params(4000, 0.1, 5);
  p.exact_rate = false;
  const LogDataset ds = generate_dataset(*w.ctx, p);
  const double frac = static_cast<double>(ds.anomaly_count()) / 4000.0;
  EXPECT_NEAR(frac, 0.1, 0.03);
}

TEST(Dataset, ComponentIndicator) {
  World w;
  cluster(w);
  EXPECT_EQ(w.ctx->default_entries(), std::vector<MethodId>{w.id("serveRequest")});
  GenParams p = params(200, 0.1, 2);
  p.component = "storage";
  EXPECT_EQ(w.ctx->resolve_entries(p), std::vector<MethodId>{w.id("storeBlock")});
  const LogDataset ds = generate_dataset(*w.ctx, p);
  for (const auto& s : ds.sequences) {
    EXPECT_EQ(w.a.model.methods[s.entry].component, std::optional<std::string>("storage"));
  }
  p.component = "network";
  for (const auto& s : generate_dataset(*w.ctx, p).sequences) {
    EXPECT_EQ(w.a.model.methods[s.entry].component, std::optional<std::string>("network"));
  }
  p.component = "compute";
  EXPECT_THROW(generate_dataset(*w.ctx, p), ConfigError);
  p.component = "storage";
  p.entries = {w.id("heartbeat")};
  EXPECT_THROW(generate_dataset(*w.ctx, p), ConfigError);
}

TEST(Dataset, ConfigErrors) {
  World plain;
  datanode(plain, false);
  EXPECT_THROW(generate_dataset(*plain.ctx, params(10, 0.1)), ConfigError);
  EXPECT_NO_THROW(generate_dataset(*plain.ctx, params(10, 0.0)));

  World w;
  datanode(w);
  GenParams p = params(10, 1.0);
  p.entries = {w.id("methodA"), w.id("methodB")};
  EXPECT_THROW(generate_dataset(*w.ctx, p), ConfigError);
  p.entries = {w.id("methodA")};
  EXPECT_EQ(generate_dataset(*w.ctx, p).anomaly_count(), 10u);
  p.entries = {99};
  EXPECT_THROW(generate_dataset(*w.ctx, p), ConfigError);

  World pruned;
  oracle::analyze_text("void a() { log(info, \"a\"); }\nvoid idle() {}", pruned.a);
  pruned.finish();
  p = params(5, 0.0);
  p.entries = {1};
  EXPECT_THROW(generate_dataset(*pruned.ctx, p), ConfigError);
}

TEST(Dataset, NormalNeedsCleanEntry) {
  World w;
  oracle::analyze_text("void a() { log(warn, \"always bad\"); }", w.a);
  w.ann.alerting = {0};
  w.ann.seed_anomaly = {0};
  w.finish();
  EXPECT_FALSE(w.ctx->can_complete_clean(0));
  EXPECT_THROW(generate_dataset(*w.ctx, params(10, 0.5)), ConfigError);
  EXPECT_EQ(generate_dataset(*w.ctx, params(10, 1.0)).anomaly_count(), 10u);
}

TEST(Dataset, LabelSoundness) {
  World w;
  synthetic(w, 200, 21, 0.1, 4);
  GenParams p = params(1000, 0.3, 8);
  std::vector<WalkTrace> traces;
  const LogDataset ds = generate_dataset(*w.ctx, p, 4, &traces);
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    const auto& seq = ds.sequences[i];
    bool alert = false;
    for (auto e : seq.events) alert = alert || w.ann.alerting.count(e);
    if (seq.label == Label::kAnomaly) {
      EXPECT_TRUE(alert);
      EXPECT_GT(traces[i].seeds_hit, 0u);
    } else {
      EXPECT_EQ(traces[i].seeds_hit, 0u);
    }
  }
}

TEST(Dataset, IndependentOfWorkerCount) {
  World w;
  synthetic(w, 150, 33, 0.1);
  const GenParams p = params(500, 0.05, 99);
  const LogDataset one = generate_dataset(*w.ctx, p, 1);
  for (unsigned workers : {2u, 3u, 8u}) EXPECT_EQ(generate_dataset(*w.ctx, p, workers), one);
  EXPECT_NE(generate_dataset(*w.ctx, params(500, 0.05, 100), 1).sequences, one.sequences);
}

TEST(Dataset, WriteReadRoundTrip) {
  World w;
  cluster(w);
  GenParams p = params(100, 0.1, 4);
  p.component = "storage";
  const LogDataset ds = generate_dataset(*w.ctx, p);
  EXPECT_EQ(ds.templates.size(), w.a.store.events.size());
  const auto dir = scratch("roundtrip");
  write_dataset(ds, dir.string());
  const LogDataset back = read_dataset(dir.string());
  EXPECT_EQ(back, ds);

  const auto again = scratch("roundtrip2");
  write_dataset(generate_dataset(*w.ctx, p), again.string());
  for (const char* f : {"sequences.csv", "templates.csv", "manifest.txt"}) {
    EXPECT_EQ(read_file((dir / f).string()), read_file((again / f).string())) << f;
  }
  const std::string csv = read_file((dir / "sequences.csv").string());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 101);
  EXPECT_EQ(csv.rfind("seq_id,label,entry,events\n", 0), 0u);
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Dataset, TemplatesWithQuotesSurviveCsv) {
  World w;
  oracle::analyze_text("void a() { log(info, \"say \\\"hi\\\", then, go\"); }", w.a);
  w.finish();
  const LogDataset ds = generate_dataset(*w.ctx, params(3, 0.0));
  const auto dir = scratch("quotes");
  write_dataset(ds, dir.string());
  EXPECT_NE(read_file((dir / "templates.csv").string()).find("\"say \"\"hi\"\", then, go\""), std::string::npos);
  EXPECT_EQ(read_dataset(dir.string()), ds);
  fs::remove_all(dir);
}

TEST(Dataset, ReadRejectsDamagedFiles) {
  World w;
  datanode(w);
  const LogDataset ds = generate_dataset(*w.ctx, params(10, 0.0));
  const auto dir = scratch("damaged");
  write_dataset(ds, dir.string());
  std::string csv = read_file((dir / "sequences.csv").string());
  write_file((dir / "sequences.csv").string(), csv.substr(0, csv.rfind('\n', csv.size() - 2) + 1));
  EXPECT_THROW(read_dataset(dir.string()), FormatError);
  write_file((dir / "sequences.csv").string(), csv + "10,7,0,1 2\n");
  EXPECT_THROW(read_dataset(dir.string()), FormatError);
  EXPECT_THROW(read_dataset((dir / "missing").string()), Error);
  fs::remove_all(dir);
}
