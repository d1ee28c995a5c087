#include "config.hpp"

#include <fstream>
#include <sstream>

#include "rnash/error.hpp"

namespace rnash::cli {
namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

template <class T>
T scalar(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_error("field '" + what + "' has the wrong type");
  }
}

std::vector<Matrix> parse_family(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) config_error("'" + what + "' must be a list of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(parse_matrix(node[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

YAML::Node emit_matrix(const Matrix& m) {
  YAML::Node rows(YAML::NodeType::Sequence);
  for (Eigen::Index h = 0; h < m.rows(); ++h) {
    YAML::Node row(YAML::NodeType::Sequence);
    row.SetStyle(YAML::EmitterStyle::Flow);
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(h, k));
    rows.push_back(row);
  }
  return rows;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_absolute() || base.empty() ? p : base / p;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

}  // namespace

template <class T>
T get_or(const YAML::Node& node, const std::string& key, T fallback) {
  if (!node || !node.IsMap() || !node[key]) return fallback;
  return scalar<T>(node[key], key);
}

template int get_or<int>(const YAML::Node&, const std::string&, int);
template double get_or<double>(const YAML::Node&, const std::string&, double);
template bool get_or<bool>(const YAML::Node&, const std::string&, bool);
template std::string get_or<std::string>(const YAML::Node&, const std::string&, std::string);
template std::uint64_t get_or<std::uint64_t>(const YAML::Node&, const std::string&, std::uint64_t);

std::vector<double> get_list(const YAML::Node& node, const std::string& key, std::vector<double> fallback) {
  if (!node || !node.IsMap() || !node[key]) return fallback;
  const YAML::Node list = node[key];
  if (!list.IsSequence()) config_error("field '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& v : list) out.push_back(scalar<double>(v, key));
  return out;
}

std::vector<int> get_int_list(const YAML::Node& node, const std::string& key, std::vector<int> fallback) {
  if (!node || !node.IsMap() || !node[key]) return fallback;
  const YAML::Node list = node[key];
  if (!list.IsSequence()) config_error("field '" + key + "' must be a list");
  std::vector<int> out;
  for (const auto& v : list) out.push_back(scalar<int>(v, key));
  return out;
}

Matrix parse_matrix(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) config_error("'" + what + "' must be a list of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  if (rows == 0) return Matrix(0, 0);
  if (!node[0].IsSequence()) config_error("'" + what + "' rows must be lists");
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index h = 0; h < rows; ++h) {
    const YAML::Node row = node[static_cast<std::size_t>(h)];
    if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != cols) {
      config_error("'" + what + "' is not rectangular");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(h, k) = scalar<double>(row[static_cast<std::size_t>(k)], what);
  }
  return m;
}

GameDescription parse_game(const YAML::Node& node, const std::filesystem::path& base_dir) {
  if (!node.IsMap()) config_error("'game' must be a table");
  GameDescription g;
  g.mode = get_or<std::string>(node, "mode", "");
  if (g.mode != "shift_invariant" && g.mode != "general" && g.mode != "mean_field_like") {
    config_error("game.mode must be shift_invariant, general or mean_field_like");
  }
  g.d = get_or<int>(node, "d", 1);
  g.T = get_or<double>(node, "T", 1.0);
  if (g.d < 1) config_error("game.d must be >= 1");
  if (!(g.T >= 0.0)) config_error("game.T must be >= 0");
  if (node["n_players"]) {
    const YAML::Node n = node["n_players"];
    if (n.IsScalar() && (n.Scalar() == "infinite" || n.Scalar() == "inf")) {
      g.n_players.reset();
    } else {
      g.n_players = scalar<int>(n, "n_players");
      if (*g.n_players < 1) config_error("game.n_players must be >= 1");
    }
  }
  if (g.mode == "shift_invariant") {
    const YAML::Node st = node["stencil"];
    if (!st || !st.IsMap() || !st["f"]) config_error("shift_invariant games need stencil.f");
    g.stencil_f = parse_matrix(st["f"], "stencil.f");
    g.stencil_g = st["g"] ? parse_matrix(st["g"], "stencil.g") : Matrix(0, 0);
    return g;
  }
  if (node["f_file"]) {
    g.f = read_matrix_file(resolve(base_dir, scalar<std::string>(node["f_file"], "f_file")));
  } else if (node["f"]) {
    g.f = parse_family(node["f"], "f");
  } else {
    config_error("general games need f or f_file");
  }
  if (node["g_file"]) {
    g.g = read_matrix_file(resolve(base_dir, scalar<std::string>(node["g_file"], "g_file")));
  } else if (node["g"]) {
    g.g = parse_family(node["g"], "g");
  }
  g.n_players = static_cast<int>(g.f.size());
  if (g.mode == "mean_field_like") {
    g.kappa_f = get_or<double>(node, "kappa_f", 0.0);
    g.kappa_g = get_or<double>(node, "kappa_g", 0.0);
    if (g.kappa_f < 0.0 || g.kappa_g < 0.0) config_error("kappa_f, kappa_g must be >= 0");
  }
  return g;
}

YAML::Node emit_game(const GameDescription& g) {
  YAML::Node node;
  node["mode"] = g.mode;
  if (g.n_players) node["n_players"] = *g.n_players;
  else node["n_players"] = "infinite";
  node["d"] = g.d;
  node["T"] = g.T;
  if (g.mode == "shift_invariant") {
    node["stencil"]["f"] = emit_matrix(g.stencil_f);
    node["stencil"]["g"] = emit_matrix(g.stencil_g);
    return node;
  }
  YAML::Node f(YAML::NodeType::Sequence), gg(YAML::NodeType::Sequence);
  for (const Matrix& m : g.f) f.push_back(emit_matrix(m));
  for (const Matrix& m : g.g) gg.push_back(emit_matrix(m));
  node["f"] = f;
  node["g"] = gg;
  if (g.mode == "mean_field_like") {
    node["kappa_f"] = g.kappa_f;
    node["kappa_g"] = g.kappa_g;
  }
  return node;
}

std::string game_to_text(const GameDescription& game) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  YAML::Node root;
  root["game"] = emit_game(game);
  out << root;
  return std::string(out.c_str()) + "\n";
}

GameDescription game_from_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("YAML parse error: ") + e.what());
  }
  if (!root["game"]) config_error("missing 'game' table");
  return parse_game(root["game"]);
}

bool same_game(const GameDescription& a, const GameDescription& b) {
  if (a.mode != b.mode || a.n_players != b.n_players || a.d != b.d || a.T != b.T) return false;
  if (a.kappa_f != b.kappa_f || a.kappa_g != b.kappa_g) return false;
  if (!same_matrix(a.stencil_f, b.stencil_f) || !same_matrix(a.stencil_g, b.stencil_g)) return false;
  if (a.f.size() != b.f.size() || a.g.size() != b.g.size()) return false;
  for (std::size_t i = 0; i < a.f.size(); ++i) {
    if (!same_matrix(a.f[i], b.f[i])) return false;
  }
  for (std::size_t i = 0; i < a.g.size(); ++i) {
    if (!same_matrix(a.g[i], b.g[i])) return false;
  }
  return true;
}

std::vector<Matrix> read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open matrix file " + path.string());
  long N = 0;
  if (!(in >> N) || N < 1) config_error("matrix file " + path.string() + " must start with N >= 1");
  std::vector<Matrix> out(static_cast<std::size_t>(N), Matrix::Zero(N, N));
  std::vector<char> seen(static_cast<std::size_t>(N * N * N), 0);
  long i, h, k;
  double v;
  long count = 0;
  while (in >> i >> h >> k >> v) {
    if (i < 0 || i >= N || h < 0 || h >= N || k < 0 || k >= N) {
      config_error("matrix file " + path.string() + ": index out of range");
    }
    char& s = seen[static_cast<std::size_t>((i * N + h) * N + k)];
    if (s) config_error("matrix file " + path.string() + ": duplicate entry");
    s = 1;
    out[i](h, k) = v;
    ++count;
  }
  if (!in.eof()) config_error("matrix file " + path.string() + ": malformed row");
  if (count != N * N * N) config_error("matrix file " + path.string() + ": expected N^3 rows");
  return out;
}

void write_matrix_file(const std::filesystem::path& path, const std::vector<Matrix>& family) {
  std::ofstream out(path);
  if (!out) config_error("cannot write matrix file " + path.string());
  out.precision(17);
  const auto N = static_cast<Eigen::Index>(family.size());
  out << N << "\n";
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index h = 0; h < N; ++h) {
      for (Eigen::Index k = 0; k < N; ++k) out << i << " " << h << " " << k << " " << family[i](h, k) << "\n";
    }
  }
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("YAML parse error: ") + e.what());
  }
  if (!root.IsMap()) config_error("config must be a table");
  ExperimentConfig cfg;
  cfg.raw_text = text;
  cfg.base_dir = base_dir;
  cfg.command = get_or<std::string>(root, "command", "");
  if (root["game"]) cfg.game = parse_game(root["game"], base_dir);

  const YAML::Node num = root["numerics"];
  Numerics& n = cfg.numerics;
  n.steps = get_or<int>(num, "steps", n.steps);
  n.refine = get_or<bool>(num, "refine", n.refine);
  n.tol = get_or<double>(num, "tol", n.tol);
  n.H = get_or<int>(num, "H", n.H);
  if (num && num["r"]) n.r = get_or<double>(num, "r", 0.0);
  if (num && num["rho"]) n.rho = get_or<double>(num, "rho", 0.0);
  n.n_nodes = get_or<int>(num, "n_nodes", n.n_nodes);
  n.dt = get_or<double>(num, "dt", n.dt);
  n.paths = get_or<int>(num, "paths", n.paths);
  n.seed = get_or<std::uint64_t>(num, "seed", n.seed);
  n.horizons = get_list(num, "horizons");
  n.t_samples = get_list(num, "t_samples");
  n.output_every = get_or<int>(num, "output_every", n.output_every);
  if (n.steps < 8) config_error("numerics.steps must be >= 8");
  if (n.H < 1) config_error("numerics.H must be >= 1");
  if (!(n.tol > 0.0)) config_error("numerics.tol must be > 0");
  if (!(n.dt > 0.0)) config_error("numerics.dt must be > 0");
  if (n.paths < 1) config_error("numerics.paths must be >= 1");
  if (n.n_nodes < 0) config_error("numerics.n_nodes must be >= 0");
  if (n.output_every < 1) config_error("numerics.output_every must be >= 1");

  const YAML::Node outputs = root["outputs"];
  cfg.out_dir = get_or<std::string>(outputs, "directory", cfg.out_dir);
  if (outputs && outputs["formats"]) {
    cfg.formats.clear();
    for (const auto& f : outputs["formats"]) {
      std::string s = scalar<std::string>(f, "formats");
      if (s != "csv" && s != "json") config_error("outputs.formats entries must be csv or json");
      cfg.formats.push_back(s);
    }
  }
  cfg.root = root;
  return cfg;
}

YAML::Node command_section(const ExperimentConfig& cfg, const std::string& command) {
  std::string key = command;
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  if (!cfg.root || !cfg.root.IsMap() || !cfg.root[key]) return YAML::Node(YAML::NodeType::Undefined);
  return cfg.root[key];
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace rnash::cli
