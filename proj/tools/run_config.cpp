#include "run_config.hpp"

#include "gsn/core.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gsn::cli {

const std::vector<Key>& known_keys() {
  static const std::vector<Key> keys = {
      {"seed", "0", "master seed for every random stream of the command"},
      {"out", "gsn-out", "output directory; nothing is written outside it"},
      // data
      {"data_source", "toy", "toy | csv | idx"},
      {"data_path", "", "file read when data_source is csv or idx"},
      {"data_binarize", "true", "threshold idx pixels at 0.5"},
      {"data_downsample", "1", "block-mean pooling factor for idx images"},
      {"data_limit", "0", "keep only the first N examples (0 keeps all)"},
      {"toy_kind", "bit-patterns", "two-gaussians-2d | bit-patterns | ring"},
      {"toy_n", "2000", "number of generated examples"},
      {"toy_bits", "4", "width of generated bit patterns (1..8)"},
      // model
      {"hidden", "64", "comma-separated hidden layer sizes, bottom first"},
      {"eta_in", "2", "pre-activation noise std for hidden layers 2 and up"},
      {"eta_out", "2", "post-activation noise std for hidden layers 2 and up"},
      {"corruption", "0.4", "salt-and-pepper probability on the visible layer"},
      {"walkback", "0", "reconstructions per training example (0 means 2 x depth)"},
      {"visible", "binary", "binary | real"},
      {"corrupt_every_step", "true", "corrupt resampled visibles inside the walkback graph"},
      {"persist_h0", "false", "start each walkback chain from the example's last hidden state"},
      // training
      {"epochs", "100", "training epochs"},
      {"learning_rate", "0.25", "initial learning rate"},
      {"momentum", "0.5", "momentum coefficient"},
      {"lr_decay", "0.99", "learning rate multiplier per epoch"},
      {"minibatch", "1", "examples per gradient step"},
      // sampling
      {"checkpoint", "", "model file for sample, inpaint and analyze-chain"},
      {"burn_in", "1000", "chain steps discarded before collection"},
      {"num_samples", "100", "samples collected"},
      {"thinning", "1", "chain steps between collected samples"},
      {"mean_field", "true", "collect reconstruction means instead of binary samples"},
      {"image_rows", "0", "tile height in the PGM grid (0 infers a square or a single row)"},
      {"image_cols", "0", "tile width in the PGM grid"},
      {"grid_cols", "10", "tiles per row in the PGM grid"},
      {"clamp_mask", "", "CSV row of 0/1 flags; 1 holds the coordinate fixed"},
      {"clamp_values", "", "CSV row of visible values used for clamped coordinates"},
      // parzen
      {"samples_path", "", "CSV of generated samples, one per row"},
      {"parzen_sigma", "0", "kernel bandwidth (0 selects it on a validation split)"},
      {"parzen_grid_lo", "0.05", "smallest bandwidth on the selection grid"},
      {"parzen_grid_hi", "1.0", "largest bandwidth on the selection grid"},
      {"parzen_grid_count", "20", "log-spaced bandwidths on the selection grid"},
      {"parzen_valid_fraction", "0.1", "leading share of the test data used for bandwidth selection"},
      // chain analysis
      {"chain", "dae", "dae | depnet-consistent | depnet-inconsistent | depnet-ordered"},
      {"depnet_variables", "3", "variables of the ordered-scan dependency network"},
      // verification
      {"stationarity_trials", "20", "random table GSNs checked for the stationary x-marginal"},
      {"perturbation_trials", "200", "random chain pairs checked against the perturbation bound"},
      {"perturbation_max_states", "16", "largest chain in the perturbation battery"},
      {"norm_convention", "row", "row | column orientation of the perturbation bound"},
      {"inject_counterexample", "false", "add a period-2 chain labelled ergodic to the ergodicity battery"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : known_keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ParameterError("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParameterError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const ParameterError& e) {
      throw ParameterError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ParameterError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ParameterError("config key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long RunConfig::integer(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ParameterError("config key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ParameterError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParameterError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<long long> RunConfig::integer_list(const std::string& key) const {
  std::vector<long long> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw ParameterError("config key '" + key + "' expects a comma-separated list of integers, got '" + get(key) + "'");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::resolved() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

}  // namespace gsn::cli
