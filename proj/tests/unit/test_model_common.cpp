#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wqst/error.hpp"
#include "wqst/models/model.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Data data(int n, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) d.X(i, j) = rng.uniform(-2, 2);
    d.y(i) = std::cos(d.X(i, 0)) + d.X(i, 1) - 0.3 * d.X(i, 2) + 0.1 * rng.normal();
  }
  return d;
}

ModelSpec quick_spec(ModelKind kind, std::uint64_t seed = 5) {
  ModelSpec s{kind, {}, seed};
  if (kind == ModelKind::RANDOM_FOREST) s.hyperparameters = {{"n_trees", 20}};
  if (kind == ModelKind::GRADIENT_BOOSTING) s.hyperparameters = {{"n_rounds", 30}};
  return s;
}

}  // namespace

TEST_CASE("kind names parse back") {
  for (ModelKind k : kAllModelKinds) {
    CHECK(parse_model_kind(model_kind_key(k)) == k);
    CHECK(parse_model_kind(model_kind_label(k)) == k);
  }
  CHECK(parse_model_kind("xgboost") == ModelKind::GRADIENT_BOOSTING);
  CHECK(parse_model_kind("lm") == ModelKind::LINEAR);
  CHECK(parse_model_kind("svr") == ModelKind::SUPPORT_VECTOR);
  CHECK_THROWS_AS(parse_model_kind("knn"), Error);
}

TEST_CASE("hyperparameter validation") {
  ModelSpec s{ModelKind::GRADIENT_BOOSTING, {{"learning_rate", -1}}, 0};
  CHECK_THROWS_AS(s.resolved(), Error);
  s.hyperparameters = {{"bogus", 1}};
  CHECK_THROWS_AS(s.resolved(), Error);
  s.hyperparameters = {{"max_depth", 2.5}};
  CHECK_THROWS_AS(s.resolved(), Error);
  s.hyperparameters = {{"max_depth", 3}};
  CHECK(s.get("max_depth") == 3);
  CHECK(s.get("learning_rate") == 0.1);
  for (ModelKind k : kAllModelKinds) {
    for (const auto& info : hyperparameter_table(k)) {
      CHECK(info.default_value >= info.min_value);
      CHECK(info.default_value <= info.max_value);
    }
  }
}

TEST_CASE("every model: deterministic, row-wise, and round-trips through a file") {
  const auto d = data(150, 1);
  const auto q = data(40, 2).X;
  for (ModelKind kind : kAllModelKinds) {
    CAPTURE(model_kind_key(kind));
    const auto spec = quick_spec(kind);
    const auto m = fit(spec, d.X, d.y, FeatureSchema::numeric(3));
    const auto again = fit(spec, d.X, d.y, FeatureSchema::numeric(3));
    const Eigen::VectorXd pq = m.predict(q);
    CHECK(pq == again.predict(q));
    CHECK(m.summary().n_train == 150);
    CHECK(std::isfinite(m.summary().in_sample_rmse));

    // Reversed rows give reversed predictions.
    const Eigen::MatrixXd rq = q.colwise().reverse();
    CHECK(m.predict(rq) == pq.reverse());

    std::stringstream buf;
    save_model(buf, m);
    const auto loaded = load_model(buf);
    CHECK(loaded.kind() == kind);
    CHECK(loaded.spec().seed == spec.seed);
    CHECK(loaded.spec().hyperparameters == spec.hyperparameters);
    CHECK(loaded.schema() == m.schema());
    CHECK(loaded.summary().in_sample_rmse == m.summary().in_sample_rmse);
    CHECK(loaded.predict(q) == pq);

    std::stringstream buf2;
    save_model(buf2, loaded);
    CHECK(buf2.str() == buf.str());
  }
}

TEST_CASE("column checks on prediction") {
  const auto d = data(50, 3);
  const auto m = fit(quick_spec(ModelKind::LINEAR), d.X, d.y, FeatureSchema::numeric(3));
  try {
    (void)m.predict(Eigen::MatrixXd::Zero(2, 4));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ColumnMismatch);
  }
  DesignMatrix dm{Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(2), FeatureSchema::numeric(3)};
  dm.schema.column_names[1] = "other";
  CHECK_THROWS_AS(m.predict(dm), Error);
}

TEST_CASE("corrupt artifacts are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(load_model(empty), Error);
  std::istringstream wrong("wqst-model 99\n");
  CHECK_THROWS_AS(load_model(wrong), Error);
  const auto d = data(50, 4);
  std::stringstream buf;
  save_model(buf, fit(quick_spec(ModelKind::RANDOM_FOREST), d.X, d.y, FeatureSchema::numeric(3)));
  const std::string text = buf.str();
  std::istringstream cut(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(cut), Error);
}

TEST_CASE("cv score survives serialization") {
  const auto d = data(60, 5);
  auto m = fit(quick_spec(ModelKind::LINEAR), d.X, d.y, FeatureSchema::numeric(3));
  m.set_cv_rmse(0.125);
  std::stringstream buf;
  save_model(buf, m);
  const auto loaded = load_model(buf);
  REQUIRE(loaded.summary().cv_rmse.has_value());
  CHECK(*loaded.summary().cv_rmse == 0.125);
}
