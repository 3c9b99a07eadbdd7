#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "deasel/classifiers.hpp"
#include "deasel/model_io.hpp"
#include "deasel/rng.hpp"
#include "helpers.hpp"

using namespace deasel;
using Catch::Matchers::WithinAbs;

namespace {

// two tight clusters at +5 and -5 per feature, margin far above noise
FeatureMatrix separable_fixture(std::size_t per_class = 20, std::size_t width = 3,
                                std::uint64_t seed = 4242) {
  FeatureMatrix fm;
  fm.positive = 1;
  fm.negative = 2;
  for (std::size_t c = 0; c < width; ++c)
    fm.columns.push_back({std::to_string(c + 1), "0"});
  Rng rng(seed);
  for (int cls : {1, 2}) {
    double center = cls == 1 ? 5.0 : -5.0;
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> row;
      for (std::size_t c = 0; c < width; ++c)
        row.push_back(center + 0.5 * normal01(rng));
      fm.rows.push_back(std::move(row));
      fm.labels.push_back(cls);
    }
  }
  return fm;
}

double training_accuracy(const Prediction& pred, const std::vector<int>& labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (pred.labels[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace

TEST_CASE("feature rows follow state-major sample order", "[classify]") {
  SignalDataset ds;
  ds.states = {{"healthy", 1}, {"faulty", 2}};
  ds.samples_per_state = 2;
  ds.positive_code = 1;
  ChannelSeries a;
  a.key = {"1", "0"};
  a.per_state_samples[1] = {10.0, 11.0};
  a.per_state_samples[2] = {20.0, 21.0};
  ChannelSeries b;
  b.key = {"2", "0"};
  b.per_state_samples[1] = {0.1, 0.2};
  b.per_state_samples[2] = {0.3, 0.4};
  ds.channels = {a, b};

  auto fm = build_features(ds, {a.key, b.key});
  REQUIRE(fm.rows.size() == 4);
  CHECK(fm.width() == 2);
  CHECK(fm.rows[0] == std::vector<double>{10.0, 0.1});
  CHECK(fm.rows[1] == std::vector<double>{11.0, 0.2});
  CHECK(fm.rows[2] == std::vector<double>{20.0, 0.3});
  CHECK(fm.rows[3] == std::vector<double>{21.0, 0.4});
  CHECK(fm.labels == std::vector<int>{1, 1, 2, 2});
  CHECK(fm.positive == 1);
  CHECK(fm.negative == 2);

  SECTION("single channel keeps one column") {
    auto fm1 = build_features(ds, {b.key});
    REQUIRE(fm1.rows.size() == 4);
    CHECK(fm1.width() == 1);
    CHECK(fm1.rows[3] == std::vector<double>{0.4});
  }
  SECTION("absent channel is named in the error") {
    try {
      build_features(ds, {{"7", "50"}});
      FAIL("expected a join error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Join);
      CHECK(std::string(e.what()).find("7@50") != std::string::npos);
    }
  }
  SECTION("empty selection refused") {
    CHECK(testutil::error_kind_of([&] { build_features(ds, {}); }) ==
          ErrorKind::Usage);
  }
}

TEST_CASE("standardization restores unit scale", "[classify]") {
  auto fm = separable_fixture(25, 4);
  auto st = Standardizer::fit(fm.rows);
  auto rows = st.apply(fm.rows);
  for (std::size_t c = 0; c < fm.width(); ++c) {
    double mean = 0;
    for (const auto& row : rows) mean += row[c];
    mean /= static_cast<double>(rows.size());
    double var = 0;
    for (const auto& row : rows) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(rows.size() - 1);
    CHECK_THAT(mean, WithinAbs(0.0, 1e-9));
    CHECK_THAT(var, WithinAbs(1.0, 1e-9));
  }

  SECTION("constant columns pass through centered") {
    std::vector<std::vector<double>> flat = {{7.0, 1.0}, {7.0, 2.0}, {7.0, 3.0}};
    auto s = Standardizer::fit(flat);
    CHECK(s.scale[0] == 1.0);
    auto out = s.apply(flat);
    CHECK(out[0][0] == 0.0);
    CHECK(out[2][0] == 0.0);
  }
  SECTION("width mismatch refused") {
    CHECK(testutil::error_kind_of([&] { st.apply_row({1.0}); }) == ErrorKind::Usage);
  }
}

TEST_CASE("nearest neighbour vote", "[classify]") {
  auto fm = separable_fixture();

  SECTION("k=1 memorizes its training set") {
    auto model = knn_train(fm, 1);
    auto pred = knn_predict(model, fm.rows);
    CHECK(training_accuracy(pred, fm.labels) == 1.0);
  }
  SECTION("k=3 neighbour mix (+,+,-) scores 2/3") {
    FeatureMatrix tiny;
    tiny.positive = 1;
    tiny.negative = 2;
    tiny.columns = {{"1", "0"}};
    tiny.rows = {{0.0}, {1.0}, {2.0}, {10.0}};
    tiny.labels = {1, 1, 2, 2};
    auto model = knn_train(tiny, 3);
    auto pred = knn_predict(model, {{0.5}});
    CHECK(pred.labels[0] == 1);
    CHECK_THAT(pred.scores[0], WithinAbs(2.0 / 3.0, 1e-15));
  }
  SECTION("even split votes positive") {
    FeatureMatrix tiny;
    tiny.positive = 1;
    tiny.negative = 2;
    tiny.columns = {{"1", "0"}};
    tiny.rows = {{-1.0}, {1.0}};
    tiny.labels = {1, 2};
    auto model = knn_train(tiny, 2);
    auto pred = knn_predict(model, {{0.0}});
    CHECK(pred.scores[0] == 0.5);
    CHECK(pred.labels[0] == 1);
  }
  SECTION("distance ties resolve by training index") {
    FeatureMatrix tiny;
    tiny.positive = 1;
    tiny.negative = 2;
    tiny.columns = {{"1", "0"}};
    tiny.rows = {{1.0}, {-1.0}, {3.0}};
    tiny.labels = {1, 2, 2};
    auto model = knn_train(tiny, 1);
    // query at the standardized midpoint of rows 0 and 1: row 0 wins the tie
    auto pred = knn_predict(model, {{0.0}});
    CHECK(pred.labels[0] == 1);
  }
  SECTION("k bounds") {
    CHECK(testutil::error_kind_of([&] { knn_train(fm, 0); }) == ErrorKind::Parameter);
    CHECK(testutil::error_kind_of([&] {
      knn_train(fm, static_cast<int>(fm.rows.size()) + 1);
    }) == ErrorKind::Parameter);
  }
}

TEST_CASE("gaussian naive bayes posteriors", "[classify]") {
  SECTION("well separated means give confident posteriors") {
    FeatureMatrix fm;
    fm.positive = 1;
    fm.negative = 2;
    fm.columns = {{"1", "0"}};
    // class means at +/-10 with unit-ish spread
    fm.rows = {{9.0}, {10.0}, {11.0}, {-9.0}, {-10.0}, {-11.0}};
    fm.labels = {1, 1, 1, 2, 2, 2};
    auto model = gnb_train(fm);
    auto [p_pos, p_neg] = gnb_posteriors(model, {10.0});
    CHECK(p_pos > 0.999);
    auto pred = gnb_predict(model, {{10.0}, {-10.0}});
    CHECK(pred.labels == std::vector<int>{1, 2});
  }
  SECTION("posteriors sum to one") {
    auto fm = separable_fixture(15, 2, 99);
    auto model = gnb_train(fm);
    Rng rng(7);
    for (int i = 0; i < 25; ++i) {
      std::vector<double> q = {uniform(rng, -6, 6), uniform(rng, -6, 6)};
      auto [p_pos, p_neg] = gnb_posteriors(model, q);
      CHECK_THAT(p_pos + p_neg, WithinAbs(1.0, 1e-12));
    }
  }
  SECTION("identical likelihoods follow the majority prior") {
    FeatureMatrix fm;
    fm.positive = 1;
    fm.negative = 2;
    fm.columns = {{"1", "0"}};
    // same feature distribution in both classes, 9:3 prior imbalance
    for (int i = 0; i < 9; ++i) {
      fm.rows.push_back({static_cast<double>(i % 3)});
      fm.labels.push_back(1);
    }
    for (int i = 0; i < 3; ++i) {
      fm.rows.push_back({static_cast<double>(i % 3)});
      fm.labels.push_back(2);
    }
    auto model = gnb_train(fm);
    auto pred = gnb_predict(model, {{0.0}, {1.0}, {2.0}});
    for (int label : pred.labels) CHECK(label == 1);
  }
  SECTION("symmetric classes leave the tie to the positive side") {
    FeatureMatrix fm;
    fm.positive = 1;
    fm.negative = 2;
    fm.columns = {{"1", "0"}};
    fm.rows = {{1.0}, {2.0}, {-1.0}, {-2.0}};
    fm.labels = {1, 1, 2, 2};
    auto model = gnb_train(fm);
    auto pred = gnb_predict(model, {{0.0}});
    CHECK_THAT(pred.scores[0], WithinAbs(0.5, 1e-12));
    CHECK(pred.labels[0] == 1);
  }
  SECTION("single-class and undersized training data refused") {
    FeatureMatrix fm;
    fm.positive = 1;
    fm.negative = 2;
    fm.columns = {{"1", "0"}};
    fm.rows = {{1.0}, {2.0}};
    fm.labels = {1, 1};
    CHECK(testutil::error_kind_of([&] { gnb_train(fm); }) == ErrorKind::Training);
    fm.rows.push_back({-1.0});
    fm.labels.push_back(2);
    CHECK(testutil::error_kind_of([&] { gnb_train(fm); }) == ErrorKind::Training);
  }
  SECTION("zero-variance features stay finite through smoothing") {
    FeatureMatrix fm;
    fm.positive = 1;
    fm.negative = 2;
    fm.columns = {{"1", "0"}, {"2", "0"}};
    fm.rows = {{5.0, 1.0}, {5.0, 2.0}, {5.0, -1.0}, {5.0, -2.0}};
    fm.labels = {1, 1, 2, 2};
    auto model = gnb_train(fm);
    for (double v : model.var_pos) CHECK(v > 0);
    auto pred = gnb_predict(model, {{5.0, 1.5}});
    CHECK(std::isfinite(pred.scores[0]));
    CHECK(pred.labels[0] == 1);
  }
}

TEST_CASE("linear svm training", "[classify]") {
  auto fm = separable_fixture();

  SECTION("separable clusters are fit exactly") {
    auto model = svm_train(fm, 1.0);
    auto pred = svm_predict(model, fm.rows);
    CHECK(training_accuracy(pred, fm.labels) == 1.0);
    for (double v : model.w) CHECK(std::isfinite(v));
  }
  SECTION("averaged objective settles monotonically") {
    auto model = svm_train(fm, 1.0, 50);
    REQUIRE(model.epoch_objectives.size() == 50);
    for (std::size_t e = 1; e < model.epoch_objectives.size(); ++e)
      CHECK(model.epoch_objectives[e] <= model.epoch_objectives[e - 1] + 1e-6);
  }
  SECTION("feature scaling leaves labels unchanged") {
    // standardization absorbs the corresponding feature rescale
    FeatureMatrix scaled = fm;
    for (auto& row : scaled.rows)
      for (double& v : row) v *= 10.0;
    auto base = svm_train(fm, 1.0);
    auto big = svm_train(scaled, 1.0);
    std::vector<std::vector<double>> queries;
    Rng rng(5150);
    for (int i = 0; i < 30; ++i)
      queries.push_back({uniform(rng, -6, 6), uniform(rng, -6, 6), uniform(rng, -6, 6)});
    std::vector<std::vector<double>> scaled_queries = queries;
    for (auto& q : scaled_queries)
      for (double& v : q) v *= 10.0;
    auto p1 = svm_predict(base, queries);
    auto p2 = svm_predict(big, scaled_queries);
    CHECK(p1.labels == p2.labels);
  }
  SECTION("identical features leave near-zero weights") {
    FeatureMatrix flat;
    flat.positive = 1;
    flat.negative = 2;
    flat.columns = {{"1", "0"}};
    flat.rows = {{3.0}, {3.0}, {3.0}, {3.0}};
    flat.labels = {1, 1, 1, 2};
    auto model = svm_train(flat, 1.0, 20);
    CHECK(std::abs(model.w[0]) < 1e-9);
    // bias then decides; majority updates pull it positive
    auto pred = svm_predict(model, {{3.0}});
    CHECK(pred.labels[0] == 1);
  }
  SECTION("parameter validation") {
    CHECK(testutil::error_kind_of([&] { svm_train(fm, 0.0); }) == ErrorKind::Parameter);
    CHECK(testutil::error_kind_of([&] { svm_train(fm, 1.0, 0); }) ==
          ErrorKind::Parameter);
    FeatureMatrix bad = fm;
    bad.rows[0][0] = std::numeric_limits<double>::quiet_NaN();
    CHECK(testutil::error_kind_of([&] { svm_train(bad, 1.0); }) == ErrorKind::Training);
  }
}

TEST_CASE("training is bitwise reproducible", "[classify]") {
  auto fm = separable_fixture(12, 2, 31337);
  auto a = svm_train(fm, 1.0, 40);
  auto b = svm_train(fm, 1.0, 40);
  CHECK(a.w == b.w);
  CHECK(a.b == b.b);
  CHECK(a.epoch_objectives == b.epoch_objectives);

  auto cva = cross_validate(fm, ClassifierKind::Knn, {}, 42);
  auto cvb = cross_validate(fm, ClassifierKind::Knn, {}, 42);
  CHECK(cva.table == cvb.table);
  CHECK(cva.chosen == cvb.chosen);
}

TEST_CASE("cross validation tunes over the grid", "[classify]") {
  auto fm = separable_fixture(15, 2);

  SECTION("single candidate is chosen trivially") {
    auto report = cross_validate(fm, ClassifierKind::Knn, {5}, 1);
    REQUIRE(report.table.size() == 1);
    CHECK(report.chosen == 5.0);
  }
  SECTION("separable fixture is perfect at every k") {
    auto report = cross_validate(fm, ClassifierKind::Knn, {}, 7);
    REQUIRE(report.table.size() == 5);  // default grid 1,3,5,7,9
    for (const auto& [k, acc] : report.table) CHECK(acc == 1.0);
    // all tie at 1.0, so the smallest k wins
    CHECK(report.chosen == 1.0);
    CHECK(report.best_accuracy == 1.0);
  }
  SECTION("svm grid ties keep the smallest C") {
    auto report = cross_validate(fm, ClassifierKind::Svm, {}, 7, 50);
    REQUIRE(report.table.size() == 3);
    CHECK(report.table[0].first == 0.1);
    bool all_tied = true;
    for (const auto& [c, acc] : report.table) all_tied &= acc == report.table[0].second;
    if (all_tied) CHECK(report.chosen == 0.1);
  }
  SECTION("gnb runs gridless") {
    auto report = cross_validate(fm, ClassifierKind::Gnb, {}, 7);
    REQUIRE(report.table.size() == 1);
    CHECK(report.best_accuracy == 1.0);
  }
  SECTION("classes below the fold count are refused") {
    FeatureMatrix small;
    small.positive = 1;
    small.negative = 2;
    small.columns = {{"1", "0"}};
    for (int i = 0; i < 5; ++i) {
      small.rows.push_back({static_cast<double>(i)});
      small.labels.push_back(1);
    }
    for (int i = 0; i < 4; ++i) {
      small.rows.push_back({static_cast<double>(-i - 1)});
      small.labels.push_back(2);
    }
    CHECK(testutil::error_kind_of([&] {
      cross_validate(small, ClassifierKind::Knn, {1}, 3);
    }) == ErrorKind::Split);
  }
}

TEST_CASE("classifier names parse both ways", "[classify]") {
  CHECK(parse_classifier("knn") == ClassifierKind::Knn);
  CHECK(parse_classifier("gnb") == ClassifierKind::Gnb);
  CHECK(parse_classifier("svm") == ClassifierKind::Svm);
  CHECK(std::string(classifier_name(ClassifierKind::Svm)) == "svm");
  CHECK(testutil::error_kind_of([] { parse_classifier("forest"); }) ==
        ErrorKind::Usage);
}

TEST_CASE("model bundles round-trip through json", "[classify]") {
  testutil::ScratchDir dir;
  auto fm = separable_fixture(10, 2, 2024);
  std::vector<std::vector<double>> queries;
  Rng rng(11);
  for (int i = 0; i < 10; ++i)
    queries.push_back({uniform(rng, -6, 6), uniform(rng, -6, 6)});

  auto roundtrip = [&](ClassifierKind kind, double param) {
    ModelBundle bundle;
    bundle.cv = cross_validate(fm, kind, {}, 13, 30);
    bundle.classifier = train_classifier(fm, kind, param, 30);
    bundle.training_seconds = 0.125;
    auto path = dir.path(std::string(classifier_name(kind)) + ".json");
    save_model(bundle, path);
    auto back = load_model(path);
    CHECK(back.classifier.kind == kind);
    CHECK(back.training_seconds == 0.125);
    CHECK(back.cv.table == bundle.cv.table);
    CHECK(back.cv.chosen == bundle.cv.chosen);
    auto before = bundle.classifier.predict(queries);
    auto after = back.classifier.predict(queries);
    CHECK(before.labels == after.labels);
    CHECK(before.scores == after.scores);
  };
  roundtrip(ClassifierKind::Knn, 3);
  roundtrip(ClassifierKind::Gnb, 0);
  roundtrip(ClassifierKind::Svm, 1.0);

  SECTION("malformed model file is a schema error") {
    auto bad = dir.path("bad.json");
    testutil::write_file(bad, "{\"kind\": \"knn\"}");
    CHECK(testutil::error_kind_of([&] { load_model(bad); }) == ErrorKind::Schema);
    testutil::write_file(bad, "not json");
    CHECK(testutil::error_kind_of([&] { load_model(bad); }) == ErrorKind::Schema);
  }
}
