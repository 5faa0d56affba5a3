#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/models/additive.hpp"
#include "wqst/models/artifact_io.hpp"
#include "wqst/models/gaussian_process.hpp"
#include "wqst/models/linear.hpp"
#include "wqst/models/support_vector.hpp"
#include "wqst/models/tree.hpp"

namespace wqst {

namespace detail::artifact {

void put(std::ostream& out, const std::string& tag, double v) {
  out << tag << ' ' << csv::format_double(v) << '\n';
}

void put(std::ostream& out, const std::string& tag, std::int64_t v) { out << tag << ' ' << v << '\n'; }

void put(std::ostream& out, const std::string& tag, const Eigen::VectorXd& v) {
  out << tag << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << csv::format_double(v(i));
  out << '\n';
}

void put(std::ostream& out, const std::string& tag, const Eigen::MatrixXd& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << csv::format_double(m(i, j));
    out << '\n';
  }
}

void put(std::ostream& out, const std::string& tag, const std::vector<double>& v) {
  put(out, tag, Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))));
}

std::string next_token(std::istream& in) {
  std::string t;
  if (!(in >> t)) throw Error(ErrorCode::ParseError, "model artifact truncated");
  return t;
}

void expect(std::istream& in, const std::string& tag) {
  const std::string t = next_token(in);
  if (t != tag) throw Error(ErrorCode::ParseError, "expected '" + tag + "' in model artifact, got '" + t + "'");
}

double parse_token_double(const std::string& token) {
  if (token == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error(ErrorCode::ParseError, "bad number '" + token + "' in model artifact");
  return v;
}

std::int64_t parse_token_int(const std::string& token) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error(ErrorCode::ParseError, "bad integer '" + token + "' in model artifact");
  return v;
}

double get_double(std::istream& in, const std::string& tag) {
  expect(in, tag);
  return parse_token_double(next_token(in));
}

std::int64_t get_int(std::istream& in, const std::string& tag) {
  expect(in, tag);
  return parse_token_int(next_token(in));
}

Eigen::VectorXd get_vector(std::istream& in, const std::string& tag) {
  expect(in, tag);
  const std::int64_t n = parse_token_int(next_token(in));
  if (n < 0) throw Error(ErrorCode::ParseError, "negative length for " + tag);
  Eigen::VectorXd v(n);
  for (std::int64_t i = 0; i < n; ++i) v(i) = parse_token_double(next_token(in));
  return v;
}

Eigen::MatrixXd get_matrix(std::istream& in, const std::string& tag) {
  expect(in, tag);
  const std::int64_t r = parse_token_int(next_token(in));
  const std::int64_t c = parse_token_int(next_token(in));
  if (r < 0 || c < 0) throw Error(ErrorCode::ParseError, "negative shape for " + tag);
  Eigen::MatrixXd m(r, c);
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j) m(i, j) = parse_token_double(next_token(in));
  return m;
}

std::vector<double> get_doubles(std::istream& in, const std::string& tag) {
  const Eigen::VectorXd v = get_vector(in, tag);
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail::artifact

namespace {

constexpr const char* kMagic = "wqst-model";
constexpr int kFormatVersion = 1;

std::string read_quoted(std::istream& in) {
  std::string s;
  if (!(in >> std::quoted(s))) throw Error(ErrorCode::ParseError, "model artifact truncated");
  return s;
}

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model) {
  namespace a = detail::artifact;
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "kind " << model_kind_key(model.kind()) << '\n';
  out << "seed " << model.spec().seed << '\n';
  out << "hyperparameters " << model.spec().hyperparameters.size() << '\n';
  for (const auto& [name, value] : model.spec().hyperparameters)
    out << name << ' ' << csv::format_double(value) << '\n';

  const FeatureSchema& schema = model.schema();
  out << "columns " << schema.size() << '\n';
  for (const auto& name : schema.column_names) out << std::quoted(name) << '\n';
  out << "groups " << schema.groups.size() << '\n';
  for (const auto& g : schema.groups) {
    out << std::quoted(g.name) << ' ' << g.first_column << ' ' << g.levels.size();
    for (const auto& level : g.levels) out << ' ' << std::quoted(level);
    out << '\n';
  }
  if (schema.regime) {
    out << "regime " << regime_key(schema.regime->kind) << ' ' << indicator_key(schema.regime->target) << ' '
        << climate_encoding_key(schema.regime->climate_encoding) << '\n';
  } else {
    out << "regime none\n";
  }

  const TrainingSummary& s = model.summary();
  a::put(out, "n_train", static_cast<std::int64_t>(s.n_train));
  a::put(out, "in_sample_rmse", s.in_sample_rmse);
  if (s.cv_rmse) a::put(out, "cv_rmse", *s.cv_rmse);
  else out << "cv_rmse none\n";
  out << "warnings " << model.warnings().size() << '\n';
  for (const auto& w : model.warnings()) out << std::quoted(w) << '\n';
  out << "state\n";
  model.state().save(out);
  out << "end\n";
  if (!out) throw Error(ErrorCode::ParseError, "failed writing model artifact");
}

void save_model(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path);
  save_model(out, model);
}

TrainedModel load_model(std::istream& in) {
  namespace a = detail::artifact;
  a::expect(in, kMagic);
  const auto version = a::parse_token_int(a::next_token(in));
  if (version != kFormatVersion)
    throw Error(ErrorCode::ParseError, "unsupported model format version " + std::to_string(version));
  a::expect(in, "kind");
  ModelSpec spec;
  spec.kind = parse_model_kind(a::next_token(in));
  a::expect(in, "seed");
  {
    const std::string t = a::next_token(in);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), seed);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw Error(ErrorCode::ParseError, "bad seed");
    spec.seed = seed;
  }
  const auto n_hp = a::get_int(in, "hyperparameters");
  for (std::int64_t k = 0; k < n_hp; ++k) {
    const std::string name = a::next_token(in);
    spec.hyperparameters[name] = a::parse_token_double(a::next_token(in));
  }

  FeatureSchema schema;
  const auto n_cols = a::get_int(in, "columns");
  for (std::int64_t k = 0; k < n_cols; ++k) schema.column_names.push_back(read_quoted(in));
  const auto n_groups = a::get_int(in, "groups");
  for (std::int64_t k = 0; k < n_groups; ++k) {
    CategoricalGroup g;
    g.name = read_quoted(in);
    g.first_column = static_cast<std::size_t>(a::parse_token_int(a::next_token(in)));
    const auto n_levels = a::parse_token_int(a::next_token(in));
    for (std::int64_t l = 0; l < n_levels; ++l) g.levels.push_back(read_quoted(in));
    schema.groups.push_back(std::move(g));
  }
  a::expect(in, "regime");
  const std::string regime = a::next_token(in);
  if (regime != "none") {
    FeatureRegime r;
    r.kind = parse_regime(regime);
    r.target = parse_indicator(a::next_token(in));
    r.climate_encoding = parse_climate_encoding(a::next_token(in));
    schema.regime = r;
  }

  TrainingSummary summary;
  summary.n_train = static_cast<std::size_t>(a::get_int(in, "n_train"));
  summary.in_sample_rmse = a::get_double(in, "in_sample_rmse");
  a::expect(in, "cv_rmse");
  const std::string cv = a::next_token(in);
  if (cv != "none") summary.cv_rmse = a::parse_token_double(cv);
  const auto n_warn = a::get_int(in, "warnings");
  std::vector<std::string> warnings;
  for (std::int64_t k = 0; k < n_warn; ++k) warnings.push_back(read_quoted(in));

  a::expect(in, "state");
  std::shared_ptr<const detail::FittedState> state;
  switch (spec.kind) {
    case ModelKind::LINEAR: state = LinearState::load(in); break;
    case ModelKind::RANDOM_FOREST: state = RandomForestState::load(in); break;
    case ModelKind::GRADIENT_BOOSTING: state = GradientBoostingState::load(in); break;
    case ModelKind::GAUSSIAN_PROCESS: state = GaussianProcessState::load(in); break;
    case ModelKind::SUPPORT_VECTOR: state = SupportVectorState::load(in); break;
    case ModelKind::ADDITIVE: state = AdditiveState::load(in); break;
  }
  a::expect(in, "end");
  return TrainedModel(std::move(spec), std::move(schema), std::move(state), summary, std::move(warnings));
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot read " + path);
  return load_model(in);
}

}  // namespace wqst
