#include <gtest/gtest.h>

#include <map>
#include <set>

#include "support.hpp"

namespace lx = luxappraise;

namespace {

const lx::Dataset& world() {
  static const lx::Dataset d = lx::generate_world(testing_support::small_world_config(21));
  return d;
}

lx::HouseRecord priced_house(const std::string& id, double mean, std::vector<std::string> photos) {
  lx::HouseRecord h;
  h.id = id;
  h.metadata = {mean, mean, 1500, 10, 3, 2};
  h.photo_ids = std::move(photos);
  return h;
}

lx::PhotoRecord src_photo(const std::string& id, lx::PhotoSource s, lx::RoomCategory room = lx::RoomCategory::kKitchen) {
  lx::PhotoRecord p;
  p.id = id;
  p.source = s;
  p.features = {0.0};
  p.room_true = room;
  return p;
}

lx::GridTask nine_gallery() {
  lx::GridTask t;
  t.id = "g1";
  t.probe = "p";
  for (int i = 0; i < 9; ++i) t.gallery.push_back("g" + std::to_string(i));
  return t;
}

lx::AnchorSet anchors_for(lx::RoomCategory room) {
  lx::AnchorSet a;
  a.room = room;
  for (int i = 0; i < 8; ++i) a.anchors[i] = "a" + std::to_string(i + 1);
  return a;
}

}  // namespace

TEST(BuildStrata, MedianSplitOfPriceMeans) {
  lx::Dataset d;
  const double means[] = {100000, 200000, 300000, 400000};
  for (int i = 0; i < 4; ++i) {
    const auto hid = "h" + std::to_string(i);
    const auto pid = "z" + std::to_string(i);
    d.houses.emplace(hid, priced_house(hid, means[i], {pid}));
    d.photos.emplace(pid, src_photo(pid, lx::PhotoSource::kZillow));
  }
  const auto s = lx::build_strata(d);
  const auto room = lx::RoomCategory::kKitchen;
  EXPECT_EQ(s.at(room, lx::Stratum::kZillowLow), (std::vector<std::string>{"z0", "z1"}));
  EXPECT_EQ(s.at(room, lx::Stratum::kZillowHigh), (std::vector<std::string>{"z2", "z3"}));
}

TEST(BuildStrata, HouseAtMedianGoesLow) {
  lx::Dataset d;
  const double means[] = {100000, 200000, 300000};
  for (int i = 0; i < 3; ++i) {
    const auto hid = "h" + std::to_string(i);
    const auto pid = "z" + std::to_string(i);
    d.houses.emplace(hid, priced_house(hid, means[i], {pid}));
    d.photos.emplace(pid, src_photo(pid, lx::PhotoSource::kZillow));
  }
  const auto s = lx::build_strata(d);
  EXPECT_EQ(s.at(lx::RoomCategory::kKitchen, lx::Stratum::kZillowLow), (std::vector<std::string>{"z0", "z1"}));
  EXPECT_EQ(s.at(lx::RoomCategory::kKitchen, lx::Stratum::kZillowHigh), (std::vector<std::string>{"z2"}));
}

TEST(BuildStrata, OnlyHouzzPhotos) {
  lx::Dataset d;
  for (int b = 1; b <= 4; ++b) {
    auto p = src_photo("hz" + std::to_string(b), lx::PhotoSource::kHouzz);
    p.budget_level = b;
    d.photos.emplace(p.id, p);
  }
  const auto s = lx::build_strata(d);
  const auto room = lx::RoomCategory::kKitchen;
  EXPECT_TRUE(s.at(room, lx::Stratum::kZillowLow).empty());
  EXPECT_TRUE(s.at(room, lx::Stratum::kZillowHigh).empty());
  EXPECT_EQ(s.at(room, lx::Stratum::kHouzzB3), std::vector<std::string>{"hz3"});
}

TEST(BuildStrata, ZillowPhotoWithoutHouseIsNamed) {
  lx::Dataset d;
  d.photos.emplace("orphan", src_photo("orphan", lx::PhotoSource::kZillow));
  try {
    lx::build_strata(d);
    FAIL();
  } catch (const lx::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("orphan"), std::string::npos);
  }
}

// Property: the high stratum is exactly the houses strictly above the median.
TEST(BuildStrata, MedianSplitBalance) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    lx::Rng rng(seed);
    lx::Dataset d;
    const std::size_t n = 5 + rng.below(30);
    std::vector<double> means;
    for (std::size_t i = 0; i < n; ++i) {
      const double mean = 100000.0 * static_cast<double>(1 + rng.below(6));
      means.push_back(mean);
      const auto hid = "h" + std::to_string(i);
      d.houses.emplace(hid, priced_house(hid, mean, {"z" + std::to_string(i)}));
      d.photos.emplace("z" + std::to_string(i), src_photo("z" + std::to_string(i), lx::PhotoSource::kZillow));
    }
    const double median = testing_support::sort_median(means);
    const auto above = static_cast<std::size_t>(
        std::count_if(means.begin(), means.end(), [&](double m) { return m > median; }));
    const auto s = lx::build_strata(d);
    const auto hi = s.at(lx::RoomCategory::kKitchen, lx::Stratum::kZillowHigh).size();
    const auto lo = s.at(lx::RoomCategory::kKitchen, lx::Stratum::kZillowLow).size();
    EXPECT_EQ(hi + lo, n);
    EXPECT_EQ(hi, above) << "seed " << seed;
  }
}

TEST(MakeGridTask, CompositionAndDeterminism) {
  const auto strata = lx::build_strata(world());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto room = lx::kAllRooms[seed % lx::kRoomCount];
    const auto t = lx::make_grid_task(strata, room, seed);
    EXPECT_EQ(t, lx::make_grid_task(strata, room, seed));
    std::map<lx::PhotoSource, int> sources;
    std::set<std::string> ids{t.probe};
    for (const auto& g : t.gallery) ids.insert(g);
    EXPECT_EQ(ids.size(), 10u);
    for (const auto& id : ids) {
      const auto& p = world().photo(id);
      ++sources[p.source];
      EXPECT_EQ(*p.room_true, room);
    }
    EXPECT_EQ(sources[lx::PhotoSource::kZillow], 2);
    EXPECT_EQ(sources[lx::PhotoSource::kHouzz], 4);
    EXPECT_EQ(sources[lx::PhotoSource::kPlaces], 2);
    EXPECT_EQ(sources[lx::PhotoSource::kGoogle], 2);
  }
}

TEST(MakeGridTask, ShortStratumIsNamed) {
  auto strata = lx::build_strata(world());
  auto& places = strata.at(lx::RoomCategory::kBedroom, lx::Stratum::kPlaces);
  places.resize(1);
  try {
    lx::make_grid_task(strata, lx::RoomCategory::kBedroom, 1);
    FAIL();
  } catch (const lx::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("places"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bedroom"), std::string::npos);
  }
}

TEST(ExtractTriplets, Counts) {
  const auto t = nine_gallery();
  lx::GridResponse r;
  r.selected = {"g1", "g4", "g7"};
  const auto triplets = lx::extract_triplets(t, r);
  EXPECT_EQ(triplets.size(), 18u);
  for (const auto& tr : triplets) {
    EXPECT_EQ(tr.probe, "p");
    EXPECT_TRUE(tr.similar == "g1" || tr.similar == "g4" || tr.similar == "g7");
    EXPECT_NO_THROW(lx::validate(tr));
  }
  r.selected.clear();
  EXPECT_TRUE(lx::extract_triplets(t, r).empty());
  r.selected = t.gallery;
  EXPECT_TRUE(lx::extract_triplets(t, r).empty());
}

TEST(ExtractTriplets, SelectionOutsideGalleryRejected) {
  lx::GridResponse r;
  r.selected = {"g1", "zz"};
  EXPECT_THROW(lx::extract_triplets(nine_gallery(), r), lx::ValidationError);
}

// Property: |triplets| = |S| (9 - |S|) for random subsets.
TEST(ExtractTriplets, CountIdentity) {
  const auto t = nine_gallery();
  lx::Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    lx::GridResponse r;
    for (const auto& g : t.gallery) {
      if (rng.bernoulli(0.4)) r.selected.push_back(g);
    }
    const auto k = r.selected.size();
    EXPECT_EQ(lx::extract_triplets(t, r).size(), k * (9 - k));
  }
}

TEST(MakeAnchorTask, OrderAndErrors) {
  const auto a = anchors_for(lx::RoomCategory::kExterior);
  const auto t = lx::make_anchor_task("probe", a, lx::RoomCategory::kExterior, 4);
  EXPECT_EQ(t.anchors, a.anchors);
  EXPECT_EQ(t.id, lx::make_anchor_task("probe", a, lx::RoomCategory::kExterior, 4).id);
  EXPECT_THROW(lx::make_anchor_task("a3", a, lx::RoomCategory::kExterior, 4), lx::ValidationError);
}

TEST(AggregateAnchorLabels, LowerMedian) {
  const auto agg = [](std::vector<int> levels) {
    std::vector<lx::AnchorResponse> rs;
    for (const int l : levels) rs.push_back({"t", "w", lx::LuxuryLevel(l), 0});
    return lx::aggregate_anchor_labels(rs).value();
  };
  EXPECT_EQ(agg({4}), 4);
  EXPECT_EQ(agg({2, 5, 6}), 5);
  EXPECT_EQ(agg({3, 6}), 3);
  EXPECT_THROW(agg({}), lx::ValidationError);
}

TEST(ScoreWorker, Rules) {
  auto grid = nine_gallery();
  grid.is_catch = true;
  grid.catch_expected = std::vector<std::string>{"g2", "g3"};
  std::vector<lx::CatchResult> results;
  for (int i = 0; i < 5; ++i) results.emplace_back(std::pair(grid, lx::GridResponse{"g1", "w", {"g3", "g2"}, 0}));
  auto report = lx::score_worker("w", results);
  EXPECT_EQ(report.score, 1.0);
  EXPECT_FALSE(report.flagged);

  lx::AnchorTask anchor;
  anchor.id = "a";
  anchor.is_catch = true;
  anchor.catch_expected = lx::LuxuryLevel(4);
  EXPECT_TRUE(lx::passes_catch(anchor, {"a", "w", lx::LuxuryLevel(5), 0}));
  EXPECT_FALSE(lx::passes_catch(anchor, {"a", "w", lx::LuxuryLevel(6), 0}));

  results.clear();
  for (int i = 0; i < 10; ++i) {
    results.emplace_back(std::pair(anchor, lx::AnchorResponse{"a", "w", lx::LuxuryLevel(i < 7 ? 4 : 8), 0}));
  }
  report = lx::score_worker("w", results);
  EXPECT_DOUBLE_EQ(report.score, 0.7);
  EXPECT_TRUE(report.flagged);

  auto plain = nine_gallery();
  std::vector<lx::CatchResult> bad{std::pair(plain, lx::GridResponse{"g1", "w", {}, 0})};
  EXPECT_THROW(lx::score_worker("w", bad), lx::ValidationError);
}

TEST(TaskCodecs, RoundTrip) {
  const auto strata = lx::build_strata(world());
  lx::TaskSet set;
  set.grid = lx::make_grid_tasks(strata, lx::RoomCategory::kKitchen, 5, 9, 0.4, &world());
  set.anchor.push_back(lx::make_anchor_task("probe", anchors_for(lx::RoomCategory::kKitchen), lx::RoomCategory::kKitchen, 1));
  set.anchor.back().is_catch = true;
  set.anchor.back().catch_expected = lx::LuxuryLevel(3);
  testing_support::TempDir dir;
  lx::save_tasks(dir / "tasks.jsonl", set);
  const auto back = lx::load_tasks(dir / "tasks.jsonl");
  EXPECT_EQ(back.grid, set.grid);
  EXPECT_EQ(back.anchor, set.anchor);
  EXPECT_EQ(std::count_if(back.grid.begin(), back.grid.end(), [](const auto& t) { return t.is_catch; }), 2);
}

TEST(CatchKeys, KeyedGridsAreAnsweredByZeroNoiseWorker) {
  const auto strata = lx::build_strata(world());
  const auto tasks = lx::make_grid_tasks(strata, lx::RoomCategory::kBathroom, 10, 2, 0.5, &world());
  const lx::AnnotatorModel exact{1.0, 0.0, 0.0, 1.0};
  for (const auto& t : tasks) {
    if (!t.is_catch) continue;
    const auto r = lx::simulate_grid_response(t, world(), exact, 77);
    EXPECT_TRUE(lx::passes_catch(t, r));
  }
}

TEST(ZeroNoiseRecovery, ThreeExactAnswersGiveRoundedLatent) {
  const lx::AnnotatorModel exact{1.0, 0.0, 0.0, 1.0};
  for (const auto& [id, p] : world().photos) {
    std::vector<lx::AnchorResponse> rs;
    for (int w = 0; w < 3; ++w) rs.push_back({"t", "w", lx::simulate_anchor_response(p, exact, w), 0});
    const int want = static_cast<int>(std::clamp(std::nearbyint(*p.latent_luxury), 1.0, 8.0));
    ASSERT_EQ(lx::aggregate_anchor_labels(rs).value(), want) << id;
  }
}
