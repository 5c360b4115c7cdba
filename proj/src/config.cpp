#include "gappy/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gappy/rng.hpp"

namespace gappy {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct TomlValue {
  enum class Kind { kString, kBool, kNumber, kArray };
  Kind kind = Kind::kString;
  std::string text;  // unescaped string, or the raw numeric token
  bool boolean = false;
  double number = 0.0;
  bool is_integer = false;
  std::vector<TomlValue> items;
};

struct RawSection {
  std::map<std::string, TomlValue> values;
  std::map<std::string, bool> used;
};

class Parser {
 public:
  Parser(const std::string& text, std::string origin)
      : origin_(std::move(origin)) {
    parse_document(text);
  }

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw std::invalid_argument(origin_ + ": " + path + ": " + msg);
  }

  RawSection* section(const std::string& name) {
    const auto it = sections_.find(name);
    return it == sections_.end() ? nullptr : &it->second;
  }

  void check_known_sections(const std::vector<std::string>& known) const {
    for (const auto& [name, raw] : sections_) {
      bool ok = false;
      for (const std::string& k : known) ok = ok || k == name;
      if (!ok) fail(name, "unknown section");
    }
  }

 private:
  void parse_document(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string current;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string stripped = trim(strip_comment(line, line_no));
      if (stripped.empty()) continue;
      if (stripped.front() == '[') {
        if (stripped.back() != ']')
          fail("line " + std::to_string(line_no), "malformed section header");
        current = trim(stripped.substr(1, stripped.size() - 2));
        if (current.empty() || !is_bare_key(current))
          fail("line " + std::to_string(line_no), "malformed section name");
        sections_[current];  // open (or reopen) the section
        continue;
      }
      const std::size_t eq = find_top_level_eq(stripped);
      if (eq == std::string::npos)
        fail("line " + std::to_string(line_no), "expected key = value");
      const std::string key = trim(std::string_view(stripped).substr(0, eq));
      const std::string value = trim(std::string_view(stripped).substr(eq + 1));
      if (current.empty())
        fail(key, "key appears before any [section] header");
      if (!is_bare_key(key))
        fail("line " + std::to_string(line_no), "malformed key '" + key + "'");
      const std::string path = current + "." + key;
      if (value.empty()) fail(path, "missing value");
      RawSection& sec = sections_[current];
      if (sec.values.count(key)) fail(path, "duplicate key");
      sec.values[key] = parse_value(value, path);
      sec.used[key] = false;
    }
  }

  static bool is_bare_key(const std::string& s) {
    for (const char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
        return false;
    return !s.empty();
  }

  std::string strip_comment(const std::string& line, int line_no) const {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
      } else if (c == '"') {
        in_str = true;
      } else if (c == '#') {
        return line.substr(0, i);
      }
    }
    if (in_str)
      fail("line " + std::to_string(line_no), "unterminated string");
    return line;
  }

  static std::size_t find_top_level_eq(const std::string& s) {
    bool in_str = false;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
      } else if (c == '"') {
        in_str = true;
      } else if (c == '[') {
        ++depth;
      } else if (c == ']') {
        --depth;
      } else if (c == '=' && depth == 0) {
        return i;
      }
    }
    return std::string::npos;
  }

  TomlValue parse_value(const std::string& token, const std::string& path) const {
    TomlValue v;
    if (token.front() == '"') {
      if (token.size() < 2 || token.back() != '"')
        fail(path, "unterminated string");
      v.kind = TomlValue::Kind::kString;
      for (std::size_t i = 1; i + 1 < token.size(); ++i) {
        char c = token[i];
        if (c == '\\' && i + 2 < token.size()) {
          const char n = token[i + 1];
          if (n == '"' || n == '\\') {
            c = n;
            ++i;
          }
        } else if (c == '"') {
          fail(path, "unexpected content after string");
        }
        v.text.push_back(c);
      }
      return v;
    }
    if (token == "true" || token == "false") {
      v.kind = TomlValue::Kind::kBool;
      v.boolean = token == "true";
      return v;
    }
    if (token.front() == '[') {
      if (token.back() != ']') fail(path, "unterminated array");
      v.kind = TomlValue::Kind::kArray;
      const std::string inner = trim(std::string_view(token).substr(1, token.size() - 2));
      if (inner.empty()) return v;
      int depth = 0;
      bool in_str = false;
      std::size_t start = 0;
      std::vector<std::string> parts;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        const char c = inner[i];
        if (in_str) {
          if (c == '\\') ++i;
          else if (c == '"') in_str = false;
        } else if (c == '"') {
          in_str = true;
        } else if (c == '[') {
          ++depth;
        } else if (c == ']') {
          --depth;
          if (depth < 0) fail(path, "mismatched brackets");
        } else if (c == ',' && depth == 0) {
          parts.push_back(trim(std::string_view(inner).substr(start, i - start)));
          start = i + 1;
        }
      }
      if (depth != 0) fail(path, "mismatched brackets");
      const std::string last = trim(std::string_view(inner).substr(start));
      if (!last.empty()) parts.push_back(last);  // tolerate trailing comma
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].empty()) fail(path, "empty array element");
        v.items.push_back(
            parse_value(parts[i], path + "[" + std::to_string(i) + "]"));
      }
      return v;
    }
    // Numeric token.
    v.kind = TomlValue::Kind::kNumber;
    v.text = token;
    std::size_t digit_start = token.front() == '+' || token.front() == '-' ? 1 : 0;
    v.is_integer = digit_start < token.size();
    for (std::size_t i = digit_start; i < token.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(token[i])))
        v.is_integer = false;
    char* end = nullptr;
    v.number = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size())
      fail(path, "cannot parse value '" + token + "'");
    return v;
  }

  std::string origin_;
  std::map<std::string, RawSection> sections_;
};

/// Typed accessors over one section, tracking key consumption.
class SectionView {
 public:
  SectionView(Parser& parser, RawSection* raw, std::string name)
      : parser_(parser), raw_(raw), name_(std::move(name)) {}

  const TomlValue* take(const std::string& key) {
    if (!raw_) return nullptr;
    const auto it = raw_->values.find(key);
    if (it == raw_->values.end()) return nullptr;
    raw_->used[key] = true;
    return &it->second;
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  void get(const std::string& key, std::string& out) {
    if (const TomlValue* v = take(key)) {
      if (v->kind != TomlValue::Kind::kString)
        parser_.fail(path(key), "expected a string");
      out = v->text;
    }
  }

  void get(const std::string& key, bool& out) {
    if (const TomlValue* v = take(key)) {
      if (v->kind != TomlValue::Kind::kBool)
        parser_.fail(path(key), "expected true or false");
      out = v->boolean;
    }
  }

  void get(const std::string& key, double& out) {
    if (const TomlValue* v = take(key)) {
      if (v->kind != TomlValue::Kind::kNumber)
        parser_.fail(path(key), "expected a number");
      out = v->number;
    }
  }

  void get(const std::string& key, int& out) {
    if (const TomlValue* v = take(key)) out = to_int(*v, path(key));
  }

  void get(const std::string& key, std::uint64_t& out) {
    if (const TomlValue* v = take(key)) {
      if (v->kind != TomlValue::Kind::kNumber || !v->is_integer ||
          v->text.front() == '-')
        parser_.fail(path(key), "expected a non-negative integer");
      char* end = nullptr;
      out = std::strtoull(v->text.c_str(), &end, 10);
    }
  }

  void get(const std::string& key, std::vector<int>& out) {
    if (const TomlValue* v = take(key)) {
      require_array(*v, key);
      out.clear();
      for (std::size_t i = 0; i < v->items.size(); ++i)
        out.push_back(to_int(v->items[i],
                             path(key) + "[" + std::to_string(i) + "]"));
    }
  }

  void get(const std::string& key, BurstDistribution& out) {
    std::string name;
    get(key, name);
    if (name.empty()) return;
    try {
      out = burst_distribution_from_name(name);
    } catch (const std::exception&) {
      parser_.fail(path(key), "expected \"gaussian\" or \"uniform_ball\"");
    }
  }

  void get(const std::string& key, Activation& out) {
    std::string name;
    get(key, name);
    if (name.empty()) return;
    try {
      out = activation_from_name(name);
    } catch (const std::exception&) {
      parser_.fail(path(key), "expected \"tanh\" or \"softplus\"");
    }
  }

  bool get_rects(const std::string& key, std::vector<Rect>& out) {
    const TomlValue* v = take(key);
    if (!v) return false;
    require_array(*v, key);
    out.clear();
    for (std::size_t i = 0; i < v->items.size(); ++i) {
      const std::string p = path(key) + "[" + std::to_string(i) + "]";
      const std::vector<double> nums = to_doubles(v->items[i], p);
      if (nums.size() != 4)
        parser_.fail(p, "expected [x0, x1, y0, y1]");
      Rect r{nums[0], nums[1], nums[2], nums[3]};
      if (!(r.x1 > r.x0) || !(r.y1 > r.y0))
        parser_.fail(p, "rectangle is empty (need x1 > x0 and y1 > y0)");
      out.push_back(r);
    }
    return true;
  }

  bool get_tuples(const std::string& key, std::size_t arity, bool integers,
                  std::vector<std::vector<double>>& out) {
    const TomlValue* v = take(key);
    if (!v) return false;
    require_array(*v, key);
    out.clear();
    for (std::size_t i = 0; i < v->items.size(); ++i) {
      const std::string p = path(key) + "[" + std::to_string(i) + "]";
      if (integers) {
        if (v->items[i].kind != TomlValue::Kind::kArray)
          parser_.fail(p, "expected an array");
        std::vector<double> nums;
        for (std::size_t j = 0; j < v->items[i].items.size(); ++j)
          nums.push_back(to_int(v->items[i].items[j],
                                p + "[" + std::to_string(j) + "]"));
        if (nums.size() != arity)
          parser_.fail(p, "expected " + std::to_string(arity) + " entries");
        out.push_back(nums);
      } else {
        const std::vector<double> nums = to_doubles(v->items[i], p);
        if (nums.size() != arity)
          parser_.fail(p, "expected " + std::to_string(arity) + " entries");
        out.push_back(nums);
      }
    }
    return true;
  }

  void finish() {
    if (!raw_) return;
    for (const auto& [key, used] : raw_->used)
      if (!used) parser_.fail(path(key), "unknown key");
  }

  Parser& parser() { return parser_; }

 private:
  void require_array(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::kArray)
      parser_.fail(path(key), "expected an array");
  }

  int to_int(const TomlValue& v, const std::string& p) {
    if (v.kind != TomlValue::Kind::kNumber || !v.is_integer)
      parser_.fail(p, "expected an integer");
    const long long n = std::strtoll(v.text.c_str(), nullptr, 10);
    if (n < -2147483648LL || n > 2147483647LL) parser_.fail(p, "out of range");
    return static_cast<int>(n);
  }

  std::vector<double> to_doubles(const TomlValue& v, const std::string& p) {
    if (v.kind != TomlValue::Kind::kArray) parser_.fail(p, "expected an array");
    std::vector<double> out;
    for (std::size_t j = 0; j < v.items.size(); ++j) {
      if (v.items[j].kind != TomlValue::Kind::kNumber)
        parser_.fail(p + "[" + std::to_string(j) + "]", "expected a number");
      out.push_back(v.items[j].number);
    }
    return out;
  }

  Parser& parser_;
  RawSection* raw_;
  std::string name_;
};

/// modalityN_rects / modalityN_counts override blocks, shared by the
/// synthetic and wave scenarios.
bool read_modality_regions(SectionView& sec,
                           std::vector<std::vector<RegionSpec>>& out) {
  std::vector<std::vector<RegionSpec>> fresh;
  bool any = false;
  for (int n = 1;; ++n) {
    const std::string rects_key = "modality" + std::to_string(n) + "_rects";
    const std::string counts_key = "modality" + std::to_string(n) + "_counts";
    std::vector<Rect> rects;
    const bool has_rects = sec.get_rects(rects_key, rects);
    std::vector<int> counts;
    std::vector<int> counts_probe;
    sec.get(counts_key, counts_probe);
    const bool has_counts = !counts_probe.empty();
    counts = counts_probe;
    if (!has_rects && !has_counts) break;
    if (!has_rects || !has_counts)
      sec.parser().fail(sec.path(rects_key),
                        "modality overrides need both _rects and _counts");
    if (rects.size() != counts.size())
      sec.parser().fail(sec.path(counts_key),
                        "_rects and _counts lengths differ");
    std::vector<RegionSpec> regions;
    for (std::size_t i = 0; i < rects.size(); ++i) {
      if (counts[i] < 1)
        sec.parser().fail(
            sec.path(counts_key) + "[" + std::to_string(i) + "]",
            "count must be >= 1");
      regions.push_back({rects[i], counts[i]});
    }
    fresh.push_back(std::move(regions));
    any = true;
  }
  if (any) out = std::move(fresh);
  return any;
}

bool read_calib_regions(SectionView& sec, std::size_t modality_count,
                        std::vector<CalibRegionSpec>& out) {
  std::vector<Rect> rects;
  const bool has_rects = sec.get_rects("calib_rects", rects);
  std::vector<int> counts;
  sec.get("calib_counts", counts);
  std::vector<std::vector<double>> pairs;
  const bool has_pairs = sec.get_tuples("calib_pairs", 2, true, pairs);
  if (!has_rects && counts.empty() && !has_pairs) return false;
  if (!has_rects || counts.empty() || !has_pairs)
    sec.parser().fail(sec.path("calib_rects"),
                      "calibration overrides need calib_rects, calib_counts, "
                      "and calib_pairs together");
  if (rects.size() != counts.size() || rects.size() != pairs.size())
    sec.parser().fail(sec.path("calib_rects"),
                      "calib_rects, calib_counts, calib_pairs lengths differ");
  out.clear();
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const std::string p = sec.path("calib_pairs") + "[" + std::to_string(i) + "]";
    const int a = static_cast<int>(pairs[i][0]);
    const int b = static_cast<int>(pairs[i][1]);
    if (a < 1 || b < 1 || a > static_cast<int>(modality_count) ||
        b > static_cast<int>(modality_count) || a == b)
      sec.parser().fail(p, "expected two distinct 1-based modality ids");
    if (counts[i] < 1)
      sec.parser().fail(sec.path("calib_counts") + "[" + std::to_string(i) + "]",
                        "count must be >= 1");
    out.push_back({rects[i], counts[i], a - 1, b - 1});
  }
  return true;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin) {
  Parser parser(text, origin);
  parser.check_known_sections(
      {"experiment", "scenario", "wifi", "wave", "training", "evaluation"});

  ExperimentConfig cfg;

  SectionView exp(parser, parser.section("experiment"), "experiment");
  exp.get("name", cfg.name);
  exp.get("seed", cfg.seed);
  exp.get("out_dir", cfg.out_dir);
  exp.finish();
  if (cfg.name.empty()) parser.fail("experiment.name", "must not be empty");

  SectionView scen(parser, parser.section("scenario"), "scenario");
  std::string id = "same_domain";
  scen.get("id", id);

  if (id == "wifi") {
    cfg.kind = ScenarioKind::kWifi;
  } else if (id == "wave") {
    cfg.kind = ScenarioKind::kWave;
  } else if (id == "same_domain" || id == "overlap" || id == "patchy" ||
             id == "french_flag") {
    cfg.kind = ScenarioKind::kSynthetic;
    cfg.synthetic = default_scenario(id);
  } else {
    parser.fail("scenario.id", "unknown scenario '" + id + "'");
  }

  if (cfg.kind == ScenarioKind::kSynthetic) {
    ScenarioConfig& s = cfg.synthetic;
    scen.get("burst_size", s.burst_size);
    scen.get("sigma", s.sigma);
    scen.get("burst_distribution", s.burst_distribution);
    read_modality_regions(scen, s.modalities);
    read_calib_regions(scen, s.modalities.size(), s.calib_regions);
    if (s.burst_size < 2) parser.fail("scenario.burst_size", "must be >= 2");
    if (!(s.sigma > 0.0)) parser.fail("scenario.sigma", "must be > 0");
  }
  scen.finish();

  SectionView wifi(parser, parser.section("wifi"), "wifi");
  if (cfg.kind == ScenarioKind::kWifi) {
    WifiConfig w = default_wifi();
    wifi.get("floor_width", w.floor_width);
    wifi.get("floor_height", w.floor_height);
    wifi.get("decay_length", w.decay_length);
    wifi.get("threshold", w.threshold);
    std::vector<std::vector<double>> transmitters;
    if (wifi.get_tuples("transmitters", 2, false, transmitters)) {
      if (transmitters.size() != 12)
        parser.fail("wifi.transmitters", "expected exactly 12 positions");
      w.transmitters.clear();
      for (const auto& t : transmitters)
        w.transmitters.push_back({t[0], t[1]});
    }
    std::vector<std::vector<double>> triplets;
    if (wifi.get_tuples("triplets", 3, true, triplets)) {
      w.triplets.clear();
      for (const auto& t : triplets)
        w.triplets.push_back({static_cast<int>(t[0]), static_cast<int>(t[1]),
                              static_cast<int>(t[2])});
    }
    wifi.get("points_per_modality", w.points_per_modality);
    wifi.get("burst_size", w.burst_size);
    wifi.get("sigma", w.sigma);
    wifi.get("calib_per_pair", w.calib_per_pair);
    wifi.get("burst_distribution", w.burst_distribution);
    if (!(w.floor_width > 0.0)) parser.fail("wifi.floor_width", "must be > 0");
    if (!(w.floor_height > 0.0)) parser.fail("wifi.floor_height", "must be > 0");
    if (!(w.decay_length > 0.0)) parser.fail("wifi.decay_length", "must be > 0");
    if (!(w.threshold > 0.0 && w.threshold < 1.0))
      parser.fail("wifi.threshold", "must be in (0, 1)");
    if (w.points_per_modality < 1)
      parser.fail("wifi.points_per_modality", "must be >= 1");
    if (w.burst_size < 2) parser.fail("wifi.burst_size", "must be >= 2");
    if (!(w.sigma > 0.0)) parser.fail("wifi.sigma", "must be > 0");
    if (w.calib_per_pair < 0)
      parser.fail("wifi.calib_per_pair", "must be >= 0");
    cfg.wifi = std::move(w);
  } else if (parser.section("wifi")) {
    parser.fail("wifi", "section requires scenario.id = \"wifi\"");
  }
  wifi.finish();

  SectionView wave(parser, parser.section("wave"), "wave");
  if (cfg.kind == ScenarioKind::kWave) {
    WaveConfig w = default_wave();
    wave.get("samples_per_trajectory", w.samples_per_trajectory);
    std::vector<std::vector<double>> observers;
    if (wave.get_tuples("observers", 3, false, observers)) {
      w.observers.clear();
      for (std::size_t i = 0; i < observers.size(); ++i) {
        const auto& o = observers[i];
        if (o[0] == 0.0 && o[1] == 0.0)
          parser.fail("wave.observers[" + std::to_string(i) + "]",
                      "direction must be nonzero");
        if (!(o[2] > 0.0))
          parser.fail("wave.observers[" + std::to_string(i) + "]",
                      "half-length must be > 0");
        w.observers.push_back({o[0], o[1], o[2]});
      }
    }
    read_modality_regions(wave, w.domains);
    read_calib_regions(wave, w.domains.size(), w.calib_regions);
    wave.get("burst_size", w.burst_size);
    wave.get("sigma", w.sigma);
    wave.get("burst_distribution", w.burst_distribution);
    if (w.samples_per_trajectory < 5)
      parser.fail("wave.samples_per_trajectory",
                  "must be >= 5 (ambient dimension must reach 2d+1)");
    if (w.observers.size() != w.domains.size())
      parser.fail("wave.observers",
                  "need exactly one observer per modality domain");
    if (w.burst_size < 2) parser.fail("wave.burst_size", "must be >= 2");
    if (!(w.sigma > 0.0)) parser.fail("wave.sigma", "must be > 0");
    cfg.wave = std::move(w);
  } else if (parser.section("wave")) {
    parser.fail("wave", "section requires scenario.id = \"wave\"");
  }
  wave.finish();

  SectionView train(parser, parser.section("training"), "training");
  TrainConfig& t = cfg.training;
  train.get("epochs", t.epochs);
  train.get("batch_bursts", t.batch_bursts);
  train.get("hidden", t.hidden);
  train.get("activation", t.activation);
  train.get("learning_rate", t.adam.learning_rate);
  train.get("lr_decay", t.lr_decay);
  train.get("w_white", t.w_white);
  train.get("w_recon", t.w_recon);
  train.get("w_calib", t.w_calib);
  train.get("grad_clip", t.grad_clip);
  train.get("embedding_dim", t.embedding_dim);
  train.get("relax_reflections", t.relax_reflections);
  train.get("standardize_inputs", t.standardize_inputs);
  train.get("estimate_sigma", t.estimate_sigma);
  train.get("recon_per_sample", t.recon_per_sample);
  train.finish();
  if (t.epochs < 1) parser.fail("training.epochs", "must be >= 1");
  if (t.batch_bursts < 1) parser.fail("training.batch_bursts", "must be >= 1");
  for (const int h : t.hidden)
    if (h < 1) parser.fail("training.hidden", "layer widths must be >= 1");
  if (!(t.adam.learning_rate > 0.0))
    parser.fail("training.learning_rate", "must be > 0");
  if (!(t.lr_decay > 0.0) || t.lr_decay > 1.0)
    parser.fail("training.lr_decay", "must be in (0, 1]");
  if (t.w_white < 0.0) parser.fail("training.w_white", "must be >= 0");
  if (t.w_recon < 0.0) parser.fail("training.w_recon", "must be >= 0");
  if (t.w_calib < 0.0) parser.fail("training.w_calib", "must be >= 0");
  if (t.embedding_dim < 0) parser.fail("training.embedding_dim", "must be >= 0");

  SectionView eval(parser, parser.section("evaluation"), "evaluation");
  EvalConfig& e = cfg.evaluation;
  eval.get("pair_sample", e.pair_sample);
  eval.get("run_baseline", e.run_baseline);
  eval.get("max_rel_rmse", e.max_rel_rmse);
  eval.get("completion", e.completion);
  eval.get("max_completion_rel_rmse", e.max_completion_rel_rmse);
  eval.finish();
  if (!(e.max_rel_rmse > 0.0))
    parser.fail("evaluation.max_rel_rmse", "must be > 0");
  if (!(e.max_completion_rel_rmse > 0.0))
    parser.fail("evaluation.max_completion_rel_rmse", "must be > 0");

  apply_seed(cfg, cfg.seed);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path);
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  const std::uint64_t scenario_seed = derive_seed(seed, 11);
  cfg.synthetic.seed = scenario_seed;
  cfg.wifi.seed = scenario_seed;
  cfg.wave.seed = scenario_seed;
  cfg.training.seed = derive_seed(seed, 22);
}

std::pair<FusionDataset, GroundTruth> generate_scenario(
    const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::kWifi:
      return make_wifi_scenario(cfg.wifi);
    case ScenarioKind::kWave:
      return make_wave_scenario(cfg.wave);
    case ScenarioKind::kSynthetic:
    default:
      return make_synthetic_scenario(cfg.synthetic);
  }
}

}  // namespace gappy
