#include "distplan/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "distplan/error.hpp"

namespace distplan {

namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed and which
// fell back to defaults.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path, std::vector<std::string>& defaulted)
      : obj_(obj), path_(std::move(path)), defaulted_(defaulted) {
    if (!obj_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& required(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) throw ValidationError(field(key) + ": required field is missing");
    return *it;
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      defaulted_.push_back(field(key));
      return nullptr;
    }
    return &*it;
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(required(key), field(key));
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    const json* v = optional(key);
    return v ? convert<T>(*v, field(key)) : fallback;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(field(it.key()) + ": unknown key");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ValidationError(where + ": expected a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
          throw ValidationError(where + ": expected a nonnegative integer");
        }
        return v.get<T>();
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
        return v.get<int>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ValidationError(where + ": expected a string");
        return v.get<std::string>();
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& defaulted_;
  std::set<std::string> seen_;
};

Vector to_vector(const json& v, const std::string& where, Eigen::Index expected = -1) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ValidationError(where + "[" + std::to_string(i) + "]: expected a number");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  if (expected >= 0 && out.size() != expected) {
    throw ValidationError(where + ": expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(out.size()));
  }
  return out;
}

Matrix to_matrix(const json& v, const std::string& where, Eigen::Index n) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != n) {
    throw ValidationError(where + ": expected a " + std::to_string(n) + "x" + std::to_string(n) + " nested array");
  }
  Matrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    out.row(r) = to_vector(v[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]", n).transpose();
  }
  return out;
}

json from_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json from_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(from_vector(m.row(r).transpose()));
  return out;
}

json from_vec3(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

Eigen::Vector3d to_vec3(const json& v, const std::string& where) { return to_vector(v, where, 3); }

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const UnsupportedProjection&) {
    throw;
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw ValidationError(where + ": " + msg);
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

Gaussian read_gaussian(const json& j, const std::string& path, std::vector<std::string>& defaulted,
                       Eigen::Index n = -1) {
  ObjectReader r(j, path, defaulted);
  const Vector mean = to_vector(r.required("mean"), r.field("mean"), n);
  const Matrix cov = to_matrix(r.required("covariance"), r.field("covariance"), mean.size());
  r.finish();
  return wrap(path, [&] { return Gaussian(mean, cov); });
}

json gaussian_to_json(const Gaussian& g) {
  return json{{"mean", from_vector(g.mean())}, {"covariance", from_matrix(g.covariance())}};
}

GoalSpec read_goal(const json& j, const std::string& path, std::vector<std::string>& defaulted) {
  ObjectReader r(j, path, defaulted);
  const std::string type = r.get<std::string>("type");
  GoalSpec out = DiracDelta(Vector::Zero(1));
  if (type == "gaussian") {
    const Vector mean = to_vector(r.required("mean"), r.field("mean"));
    const Matrix cov = to_matrix(r.required("covariance"), r.field("covariance"), mean.size());
    out = wrap(path, [&] { return Gaussian(mean, cov); });
  } else if (type == "gmm") {
    const json& w = r.required("weights");
    const json& comps = r.required("components");
    if (!comps.is_array() || comps.empty()) throw ValidationError(r.field("components") + ": expected a nonempty array");
    const Vector weights = to_vector(w, r.field("weights"), static_cast<Eigen::Index>(comps.size()));
    std::vector<Gaussian> gs;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      gs.push_back(read_gaussian(comps[i], r.field("components") + "[" + std::to_string(i) + "]", defaulted));
    }
    out = wrap(path, [&] { return Gmm(std::vector<double>(weights.data(), weights.data() + weights.size()), gs); });
  } else if (type == "dirac") {
    const Vector p = to_vector(r.required("point"), r.field("point"));
    out = wrap(path, [&] { return DiracDelta(p); });
  } else if (type == "uniform") {
    const Vector lo = to_vector(r.required("lower"), r.field("lower"));
    const Vector hi = to_vector(r.required("upper"), r.field("upper"), lo.size());
    out = wrap(path, [&] { return UniformBox(lo, hi); });
  } else {
    throw ValidationError(r.field("type") + ": must be gaussian, gmm, dirac or uniform, got \"" + type + "\"");
  }
  r.finish();
  return out;
}

Rect read_rect(const json& j, const std::string& where) {
  const Vector v = to_vector(j, where, 4);
  return Rect{v[0], v[1], v[2], v[3]};
}

json rect_to_json(const Rect& r) { return json::array({r.xmin, r.ymin, r.xmax, r.ymax}); }

DubinsConfig read_dubins(ObjectReader& r) {
  DubinsConfig c;
  c.v_max = r.get_or("v_max", c.v_max);
  c.psi_max = r.get_or("psi_max", c.psi_max);
  if (const json* tb = r.optional("tau_bounds")) {
    const Vector v = to_vector(*tb, r.field("tau_bounds"), 2);
    c.tau_min = v[0];
    c.tau_max = v[1];
  }
  c.m_primitives = r.get_or<std::size_t>("m_primitives", c.m_primitives);
  c.alpha = r.get_or("alpha", c.alpha);
  c.u_epsilon = r.get_or("u_epsilon", c.u_epsilon);
  c.gamma = r.get_or("gamma", c.gamma);
  if (const json* w = r.optional("world")) c.world = read_rect(*w, r.field("world"));
  if (const json* obs = r.optional("obstacles")) {
    if (!obs->is_array()) throw ValidationError(r.field("obstacles") + ": expected an array");
    for (std::size_t i = 0; i < obs->size(); ++i) {
      c.obstacles.push_back(read_rect((*obs)[i], r.field("obstacles") + "[" + std::to_string(i) + "]"));
    }
  }
  c.collision_substeps = r.get_or("collision_substeps", c.collision_substeps);
  r.finish();
  wrap("environment", [&] {
    c.validate();
    return 0;
  });
  return c;
}

ArmConfig read_arm(ObjectReader& r, std::vector<std::string>& defaulted) {
  ArmConfig c = ArmConfig::reference_chain();
  if (const json* js = r.optional("joints")) {
    if (!js->is_array()) throw ValidationError(r.field("joints") + ": expected an array");
    c.joints.clear();
    for (std::size_t i = 0; i < js->size(); ++i) {
      ObjectReader jr((*js)[i], r.field("joints") + "[" + std::to_string(i) + "]", defaulted);
      Joint joint;
      joint.axis = to_vec3(jr.required("axis"), jr.field("axis"));
      joint.offset = to_vec3(jr.required("offset"), jr.field("offset"));
      jr.finish();
      c.joints.push_back(joint);
    }
  }
  const auto n = static_cast<Eigen::Index>(c.joints.size());
  if (const json* lim = r.optional("joint_limits")) {
    ObjectReader lr(*lim, r.field("joint_limits"), defaulted);
    c.lower_limits = to_vector(lr.required("lower"), lr.field("lower"), n);
    c.upper_limits = to_vector(lr.required("upper"), lr.field("upper"), n);
    lr.finish();
  }
  c.max_step = r.get_or("max_step", c.max_step);
  c.alpha = r.get_or("alpha", c.alpha);
  if (const json* obs = r.optional("obstacles")) {
    if (!obs->is_array()) throw ValidationError(r.field("obstacles") + ": expected an array");
    for (std::size_t i = 0; i < obs->size(); ++i) {
      const Vector v = to_vector((*obs)[i], r.field("obstacles") + "[" + std::to_string(i) + "]", 4);
      c.obstacles.push_back(Sphere{v.head<3>(), v[3]});
    }
  }
  c.link_radius = r.get_or("link_radius", c.link_radius);
  c.spheres_per_link = r.get_or("spheres_per_link", c.spheres_per_link);
  if (const json* t = r.optional("target")) c.target = to_vec3(*t, r.field("target"));
  c.gamma = r.get_or("gamma", c.gamma);
  c.ee_weight = r.get_or("ee_weight", c.ee_weight);
  c.collision_substeps = r.get_or("collision_substeps", c.collision_substeps);
  r.finish();
  wrap("environment", [&] {
    c.validate();
    return 0;
  });
  return c;
}

json environment_to_json(const EnvironmentConfig& env) {
  if (const auto* d = std::get_if<DubinsConfig>(&env)) {
    json obs = json::array();
    for (const auto& o : d->obstacles) obs.push_back(rect_to_json(o));
    return json{{"type", "dubins"},
                {"v_max", d->v_max},
                {"psi_max", d->psi_max},
                {"tau_bounds", json::array({d->tau_min, d->tau_max})},
                {"m_primitives", d->m_primitives},
                {"alpha", d->alpha},
                {"u_epsilon", d->u_epsilon},
                {"gamma", d->gamma},
                {"world", rect_to_json(d->world)},
                {"obstacles", obs},
                {"collision_substeps", d->collision_substeps}};
  }
  const ArmConfig& a = std::get<ArmConfig>(env);
  json joints = json::array();
  for (const auto& j : a.joints) joints.push_back(json{{"axis", from_vec3(j.axis)}, {"offset", from_vec3(j.offset)}});
  json obs = json::array();
  for (const auto& s : a.obstacles) obs.push_back(json::array({s.center[0], s.center[1], s.center[2], s.radius}));
  return json{{"type", "arm"},
              {"joints", joints},
              {"joint_limits", json{{"lower", from_vector(a.lower_limits)}, {"upper", from_vector(a.upper_limits)}}},
              {"max_step", a.max_step},
              {"alpha", a.alpha},
              {"obstacles", obs},
              {"link_radius", a.link_radius},
              {"spheres_per_link", a.spheres_per_link},
              {"target", from_vec3(a.target)},
              {"gamma", a.gamma},
              {"ee_weight", a.ee_weight},
              {"collision_substeps", a.collision_substeps}};
}

std::string line_info(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

nlohmann::json goal_to_json(const GoalSpec& g) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          json out = gaussian_to_json(d);
          out["type"] = "gaussian";
          return out;
        } else if constexpr (std::is_same_v<T, Gmm>) {
          json comps = json::array();
          for (const auto& c : d.components()) comps.push_back(gaussian_to_json(c));
          return json{{"type", "gmm"}, {"weights", d.weights()}, {"components", comps}};
        } else if constexpr (std::is_same_v<T, DiracDelta>) {
          return json{{"type", "dirac"}, {"point", from_vector(d.point)}};
        } else {
          return json{{"type", "uniform"}, {"lower", from_vector(d.lower())}, {"upper", from_vector(d.upper())}};
        }
      },
      g);
}

GoalSpec goal_from_json(const nlohmann::json& j) {
  std::vector<std::string> ignored;
  return read_goal(j, "goal", ignored);
}

Scenario parse_scenario(const nlohmann::json& doc) {
  Scenario s;
  ObjectReader root(doc, "", s.defaulted);
  s.name = root.get<std::string>("name");
  s.description = root.get_or<std::string>("description", "");
  s.seed = root.get_or<std::uint64_t>("seed", 0);

  {
    ObjectReader er(root.required("environment"), "environment", s.defaulted);
    const std::string type = er.get<std::string>("type");
    if (type == "dubins") {
      s.environment = read_dubins(er);
    } else if (type == "arm") {
      s.environment = read_arm(er, s.defaulted);
    } else {
      throw ValidationError("environment.type: must be dubins or arm, got \"" + type + "\"");
    }
  }
  const std::shared_ptr<const Environment> env = s.make_environment();
  const Eigen::Index n = env->state_dim();

  s.start = read_gaussian(root.required("start"), "start", s.defaulted, n);
  if (const json* obs = root.optional("observation_covariance")) {
    s.observation_cov = to_matrix(*obs, "observation_covariance", n);
    wrap("observation_covariance", [&] { return Gaussian(Vector::Zero(n), s.observation_cov); });
  } else {
    s.observation_cov = s.start.covariance();
  }
  s.goal = read_goal(root.required("goal"), "goal", s.defaulted);
  if (dim(s.goal) != n) {
    throw ValidationError("goal: dimension " + std::to_string(dim(s.goal)) + " does not match the state dimension " +
                          std::to_string(n));
  }

  const std::string proj = root.get<std::string>("projection");
  s.planner.projection = wrap("projection", [&] { return parse_projection(proj); });
  if (s.planner.projection == Projection::I &&
      (std::holds_alternative<DiracDelta>(s.goal) || std::holds_alternative<UniformBox>(s.goal))) {
    throw UnsupportedProjection(
        "projection: the I-projection D(belief || goal) is undefined for a " + std::string(kind_name(s.goal)) +
        " goal: the goal density is zero outside its support, so log(belief / goal) divides by zero at every "
        "point outside the goal where the Gaussian belief has mass. Use projection \"M\".");
  }

  if (const json* pj = root.optional("planner")) {
    ObjectReader pr(*pj, "planner", s.defaulted);
    s.planner.horizon = pr.get_or<std::size_t>("horizon", s.planner.horizon);
    s.planner.eta = pr.get_or("eta", s.planner.eta);
    s.planner.max_mpc_steps = pr.get_or<std::size_t>("max_mpc_steps", s.planner.max_mpc_steps);
    const std::string lm = pr.get_or<std::string>("lambda_mode", std::string(to_string(s.planner.lambda_mode)));
    s.planner.lambda_mode = wrap("planner.lambda_mode", [&] { return parse_lambda_mode(lm); });
    pr.finish();
  }
  wrap("planner", [&] {
    s.planner.validate();
    return 0;
  });
  if (const auto* d = std::get_if<DubinsConfig>(&s.environment)) {
    if (d->m_primitives != s.planner.horizon) {
      throw ValidationError("planner.horizon: must equal environment.m_primitives (" +
                            std::to_string(d->m_primitives) + "), one unscented step per primitive");
    }
  }

  if (const json* uj = root.optional("ut")) {
    ObjectReader ur(*uj, "ut", s.defaulted);
    s.planner.ut.beta = ur.get_or("beta", s.planner.ut.beta);
    ur.finish();
  }
  if (!(s.planner.ut.beta > 0.0)) throw ValidationError("ut.beta: must be > 0");

  CemConfig& c = s.planner.cem;
  if (const json* cj = root.optional("cem")) {
    ObjectReader cr(*cj, "cem", s.defaulted);
    c.n_samples = cr.get_or<std::size_t>("n_samples", c.n_samples);
    c.n_elite = cr.get_or<std::size_t>("n_elite", c.n_elite);
    c.max_iters = cr.get_or<std::size_t>("max_iters", c.max_iters);
    c.epsilon = cr.get_or("epsilon", c.epsilon);
    c.init_scale = cr.get_or("init_scale", c.init_scale);
    c.n_components = cr.get_or<std::size_t>("n_components", c.n_components);
    const std::string cov = cr.get_or<std::string>("covariance", std::string(to_string(c.covariance)));
    c.covariance = wrap("cem.covariance", [&] { return parse_covariance_mode(cov); });
    c.variance_floor = cr.get_or("variance_floor", c.variance_floor);
    cr.finish();
  }
  c.beta = s.planner.ut.beta;
  const Eigen::Index adim = env->action_dim() * static_cast<Eigen::Index>(s.planner.horizon);
  c.lower = Vector::Constant(adim, -1.0);
  c.upper = Vector::Constant(adim, 1.0);
  wrap("cem", [&] {
    c.validate(adim);
    return 0;
  });
  s.planner.ut.process_noise = env->process_noise();
  root.finish();
  return s;
}

Scenario parse_scenario_text(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": parse error at " + line_info(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                          e.what());
  }
  try {
    return parse_scenario(doc);
  } catch (const UnsupportedProjection& e) {
    throw UnsupportedProjection(source + ": " + e.what());
  } catch (const Error& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path.string());
}

nlohmann::json scenario_to_json(const Scenario& s) {
  const CemConfig& c = s.planner.cem;
  return json{{"name", s.name},
              {"description", s.description},
              {"seed", s.seed},
              {"environment", environment_to_json(s.environment)},
              {"start", gaussian_to_json(s.start)},
              {"observation_covariance", from_matrix(s.observation_cov)},
              {"goal", goal_to_json(s.goal)},
              {"projection", std::string(to_string(s.planner.projection))},
              {"planner",
               json{{"horizon", s.planner.horizon},
                    {"eta", s.planner.eta},
                    {"max_mpc_steps", s.planner.max_mpc_steps},
                    {"lambda_mode", std::string(to_string(s.planner.lambda_mode))}}},
              {"ut", json{{"beta", s.planner.ut.beta}}},
              {"cem",
               json{{"n_samples", c.n_samples},
                    {"n_elite", c.n_elite},
                    {"max_iters", c.max_iters},
                    {"epsilon", c.epsilon},
                    {"init_scale", c.init_scale},
                    {"n_components", c.n_components},
                    {"covariance", std::string(to_string(c.covariance))},
                    {"variance_floor", c.variance_floor}}}};
}

void write_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << scenario_to_json(s).dump(2) << "\n";
}

bool operator==(const Scenario& a, const Scenario& b) { return scenario_to_json(a) == scenario_to_json(b); }

std::string config_hash(const Scenario& s) {
  json j = scenario_to_json(s);
  j.erase("name");
  j.erase("description");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::shared_ptr<const Environment> Scenario::make_environment() const {
  if (const auto* d = std::get_if<DubinsConfig>(&environment)) return std::make_shared<DubinsEnv>(*d);
  return std::make_shared<ArmEnv>(std::get<ArmConfig>(environment));
}

MpcProblem Scenario::problem() const {
  return MpcProblem{make_environment(), start, goal, planner, observation_cov};
}

}  // namespace distplan
