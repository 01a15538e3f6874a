#include "statarb/serialize.hpp"

#include <sstream>

#include "statarb/csv.hpp"
#include "statarb/error.hpp"

namespace statarb {

Json matrix_to_json(const Matrix& a) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back(a(i, j));
  }
  return Json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    fail(ErrorKind::Parse, what + ": expected {rows, cols, data}");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    fail(ErrorKind::Parse, what + ": data length does not match rows * cols");
  }
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) a(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
  }
  return a;
}

Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorKind::Parse, what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::Parse, what + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

const Json& field(const Json& j, const std::string& key) {
  if (!j.contains(key)) fail(ErrorKind::Parse, "missing field '" + key + "'");
  return j.at(key);
}

}  // namespace

Json model_to_json(const ModelParams& p) {
  Json j;
  j["d"] = p.d;
  j["m"] = p.m;
  j["tickers"] = p.tickers;
  j["mu_excess"] = vector_to_json(p.mu);
  j["theta"] = vector_to_json(p.theta);
  j["delta"] = vector_to_json(p.delta);
  j["eta"] = vector_to_json(p.eta);
  j["r"] = p.r;
  j["gamma"] = p.gamma;
  j["beta"] = matrix_to_json(p.beta);
  j["sigma0"] = matrix_to_json(p.sigma0);
  j["cross"] = matrix_to_json(p.cross);
  j["sigma1"] = matrix_to_json(p.sigma1);
  j["sigma2"] = matrix_to_json(p.sigma2);
  j["sigma3"] = matrix_to_json(p.sigma3);
  j["sigma_c"] = matrix_to_json(p.sigma_c);
  j["sigma_c_defined"] = p.sigma_c_defined;
  if (p.beta_ols.size() > 0) j["beta_ols"] = matrix_to_json(p.beta_ols);
  j["beta_deviation"] = p.beta_deviation;
  j["factor_shrinkage"] = p.factor_shrinkage;
  j["stock_shrinkage"] = p.stock_shrinkage;
  j["warnings"] = p.warnings;
  return j;
}

ModelParams model_from_json(const Json& j) {
  try {
    ModelInputs in;
    in.mu = vector_from_json(field(j, "mu_excess"), "mu_excess");
    in.theta = vector_from_json(field(j, "theta"), "theta");
    in.delta = vector_from_json(field(j, "delta"), "delta");
    in.eta = vector_from_json(field(j, "eta"), "eta");
    in.r = field(j, "r").get<double>();
    in.gamma = field(j, "gamma").get<double>();
    in.sigma0 = matrix_from_json(field(j, "sigma0"), "sigma0");
    in.cross = matrix_from_json(field(j, "cross"), "cross");
    in.sigma1 = matrix_from_json(field(j, "sigma1"), "sigma1");
    ModelParams p = make_model(in);
    if (j.contains("tickers")) p.tickers = j.at("tickers").get<std::vector<std::string>>();
    if (j.contains("beta_ols")) p.beta_ols = matrix_from_json(j.at("beta_ols"), "beta_ols");
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("model json: ") + e.what());
  }
}

Json solution_to_json(const HJBSolution& s) {
  Json j;
  j["variant"] = to_string(s.variant);
  j["C_bar"] = matrix_to_json(s.C_bar);
  j["b_bar"] = vector_to_json(s.b_bar);
  j["L_bar"] = s.L_bar;
  j["growth_rate"] = s.growth_rate;
  j["care_iterations"] = s.care_iterations;
  j["care_residual"] = s.care_residual;
  j["seed_horizon"] = s.seed_horizon;
  Json eig = Json::array();
  for (Eigen::Index i = 0; i < s.R_eigenvalues.size(); ++i) {
    eig.push_back({s.R_eigenvalues(i).real(), s.R_eigenvalues(i).imag()});
  }
  j["R_eigenvalues"] = eig;
  const auto& c = s.certificate;
  Json cert{{"q_min_eig", c.q_min_eig},
            {"q_max_eig", c.q_max_eig},
            {"minus_p_min_eig", c.minus_p_min_eig},
            {"minus_p_max_eig", c.minus_p_max_eig},
            {"q_positive_definite", c.q_positive_definite},
            {"minus_p_psd", c.minus_p_psd},
            {"controllability_rank", c.controllability_rank},
            {"d", c.d},
            {"observable", c.observable},
            {"stabilisable", c.stabilisable},
            {"steady_state_guaranteed", c.steady_state_guaranteed},
            {"notes", c.notes}};
  if (c.rank_conditions) {
    const auto& r = *c.rank_conditions;
    cert["rank_conditions"] = {{"rank_btb", r.rank_btb},
                               {"rank_projected_delta", r.rank_projected_delta},
                               {"rank_projected_delta_beta", r.rank_projected_delta_beta},
                               {"delta_proportional_identity", r.delta_proportional_identity},
                               {"condition_violated", r.condition_violated}};
  }
  j["certificate"] = cert;
  return j;
}

Json synth_to_json(const SynthConfig& c) {
  Json j;
  j["d"] = c.d;
  j["m"] = c.m;
  j["eta"] = vector_to_json(c.eta);
  j["mu"] = vector_to_json(c.mu);
  j["delta"] = vector_to_json(c.delta);
  j["theta"] = vector_to_json(c.theta);
  j["sigma0"] = matrix_to_json(c.sigma0);
  j["sigma1"] = matrix_to_json(c.sigma1);
  j["cross"] = matrix_to_json(c.cross);
  j["dt"] = c.dt;
  j["n_steps"] = c.n_steps;
  j["seed"] = c.seed;
  if (c.z0) j["z0"] = vector_to_json(*c.z0);
  j["s0"] = c.s0;
  j["f0"] = c.f0;
  return j;
}

SynthConfig synth_from_json(const Json& j) {
  try {
    SynthConfig c;
    c.eta = vector_from_json(field(j, "eta"), "eta");
    c.mu = vector_from_json(field(j, "mu"), "mu");
    c.delta = vector_from_json(field(j, "delta"), "delta");
    c.theta = vector_from_json(field(j, "theta"), "theta");
    c.sigma0 = matrix_from_json(field(j, "sigma0"), "sigma0");
    c.sigma1 = matrix_from_json(field(j, "sigma1"), "sigma1");
    c.cross = matrix_from_json(field(j, "cross"), "cross");
    c.m = j.value("m", c.eta.size());
    c.d = j.value("d", c.mu.size());
    c.dt = j.value("dt", kDefaultDt);
    c.n_steps = j.value("n_steps", Eigen::Index{0});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("z0")) c.z0 = vector_from_json(j.at("z0"), "z0");
    c.s0 = j.value("s0", 100.0);
    c.f0 = j.value("f0", 100.0);
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("synthetic market json: ") + e.what());
  }
}

Json truth_json(const SynthConfig& c, const SynthPath& path, const std::vector<std::string>& tickers) {
  Json j = synth_to_json(c);
  j["tickers"] = tickers;
  j["alpha"] = vector_to_json(path.alpha);
  j["beta"] = matrix_to_json(path.beta);
  return j;
}

Json read_json(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::ostringstream text;
  for (const auto& l : lines) text << l << '\n';
  try {
    return Json::parse(text.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) { write_text(path, j.dump(2) + "\n"); }

}  // namespace statarb
