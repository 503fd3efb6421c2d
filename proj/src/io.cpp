#include "tspca/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tspca {

namespace {

namespace fs = std::filesystem;

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') {
    s.pop_back();
  }
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Token {
  std::string_view text;
  long column = 1;  // 1-based character position of the token start
};

std::vector<Token> split_tokens(std::string_view line, char sep, long base_column = 1) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    const std::size_t len = pos == std::string_view::npos ? line.size() - start : pos - start;
    out.push_back(Token{line.substr(start, len), base_column + static_cast<long>(start)});
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

double parse_double(const Token& tok, long lineno) {
  const std::string_view sv = trim(tok.text);
  double value = 0.0;
  const auto* end = sv.data() + sv.size();
  const auto [p, ec] = std::from_chars(sv.data(), end, value, std::chars_format::general);
  if (sv.empty() || ec != std::errc{} || p != end) {
    throw ParseError(lineno, tok.column,
                     "expected a number, got '" + std::string(tok.text) + "'");
  }
  return value;
}

long parse_nonneg(const Token& tok, long lineno, const char* what) {
  const std::string_view sv = trim(tok.text);
  long value = 0;
  const auto* end = sv.data() + sv.size();
  const auto [p, ec] = std::from_chars(sv.data(), end, value);
  if (sv.empty() || ec != std::errc{} || p != end || value < 0) {
    throw ParseError(lineno, tok.column, std::string("expected a nonnegative ") + what +
                                             ", got '" + std::string(tok.text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view sv, long lineno, long column) {
  const std::string v = lowercase(trim(sv));
  if (v == "true") {
    return true;
  }
  if (v == "false") {
    return false;
  }
  throw ParseError(lineno, column, "expected true or false, got '" + std::string(sv) + "'");
}

bool is_integer_token(std::string_view sv) {
  long value = 0;
  const auto* end = sv.data() + sv.size();
  const auto [p, ec] = std::from_chars(sv.data(), end, value);
  return !sv.empty() && ec == std::errc{} && p == end;
}

// Dense integer ids in order of first appearance.
std::vector<long> dense_label_map(const std::vector<std::string>& tokens) {
  std::vector<std::string> order;
  std::vector<long> out;
  out.reserve(tokens.size());
  for (const std::string& tok : tokens) {
    const auto it = std::find(order.begin(), order.end(), tok);
    if (it == order.end()) {
      order.push_back(tok);
      out.push_back(static_cast<long>(order.size()) - 1);
    } else {
      out.push_back(static_cast<long>(it - order.begin()));
    }
  }
  return out;
}

std::string default_name(Index v) { return "v" + std::to_string(v); }

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, p);
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open for writing: " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw IoError("rename failed for " + path.string() + ": " + ec.message());
  }
}

std::filesystem::path sidecar_path(const fs::path& csv_path) {
  fs::path p = csv_path;
  p += ".meta.json";
  return p;
}

Dataset read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) {
    throw ParseError(1, 1, "empty file, expected a header row");
  }
  ++lineno;
  line = strip_cr(line);
  const auto header = split_tokens(line, ',');
  if (header.size() < 3 || trim(header[0].text) != "instance" ||
      trim(header[1].text) != "time") {
    throw ParseError(1, 1,
                     "header must be instance,time,<variables...>[,label], got '" + line + "'");
  }
  const bool has_label = trim(header.back().text) == "label";
  const std::size_t var_end = header.size() - (has_label ? 1 : 0);
  if (var_end <= 2) {
    throw ParseError(1, 1, "header has no variable columns");
  }
  std::vector<std::string> names;
  for (std::size_t i = 2; i < var_end; ++i) {
    names.emplace_back(trim(header[i].text));
  }
  const Index d = static_cast<Index>(names.size());

  struct Row {
    long instance = 0;
    long time = 0;
    std::vector<double> values;
    std::string label;
    long lineno = 0;
  };
  std::vector<Row> rows;
  long max_instance = -1;
  long max_time = -1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (trim(line).empty()) {
      continue;
    }
    const auto toks = split_tokens(line, ',');
    const std::size_t expected = 2 + static_cast<std::size_t>(d) + (has_label ? 1 : 0);
    if (toks.size() != expected) {
      throw RaggedRowError(lineno, "expected " + std::to_string(expected) +
                                       " fields, got " + std::to_string(toks.size()));
    }
    Row row;
    row.lineno = lineno;
    row.instance = parse_nonneg(toks[0], lineno, "instance id");
    row.time = parse_nonneg(toks[1], lineno, "time index");
    row.values.reserve(static_cast<std::size_t>(d));
    for (Index v = 0; v < d; ++v) {
      row.values.push_back(parse_double(toks[2 + static_cast<std::size_t>(v)], lineno));
    }
    if (has_label) {
      row.label = std::string(trim(toks.back().text));
    }
    max_instance = std::max(max_instance, row.instance);
    max_time = std::max(max_time, row.time);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError(lineno + 1, 1, "no data rows");
  }

  const Index b_count = max_instance + 1;
  const Index n_count = max_time + 1;
  std::vector<Eigen::MatrixXd> slices(static_cast<std::size_t>(n_count),
                                      Eigen::MatrixXd::Zero(b_count, d));
  std::vector<char> seen(static_cast<std::size_t>(b_count * n_count), 0);
  std::vector<std::string> label_tokens(static_cast<std::size_t>(b_count));
  std::vector<char> label_known(static_cast<std::size_t>(b_count), 0);
  for (const Row& row : rows) {
    char& flag = seen[static_cast<std::size_t>(row.instance * n_count + row.time)];
    if (flag) {
      throw ParseError(row.lineno, 1,
                       "duplicate cell (instance=" + std::to_string(row.instance) +
                           ", time=" + std::to_string(row.time) + ")");
    }
    flag = 1;
    for (Index v = 0; v < d; ++v) {
      slices[static_cast<std::size_t>(row.time)](row.instance, v) =
          row.values[static_cast<std::size_t>(v)];
    }
    if (has_label) {
      auto& known = label_known[static_cast<std::size_t>(row.instance)];
      auto& tok = label_tokens[static_cast<std::size_t>(row.instance)];
      if (known && tok != row.label) {
        throw InconsistentLabelError(row.instance, "'" + tok + "' vs '" + row.label + "'");
      }
      tok = row.label;
      known = 1;
    }
  }
  for (Index bi = 0; bi < b_count; ++bi) {
    for (Index n = 0; n < n_count; ++n) {
      if (!seen[static_cast<std::size_t>(bi * n_count + n)]) {
        throw MissingCellError(bi, n);
      }
    }
  }

  std::optional<std::vector<long>> labels;
  if (has_label) {
    const bool all_integer = std::all_of(label_tokens.begin(), label_tokens.end(),
                                         [](const std::string& t) { return is_integer_token(t); });
    if (all_integer) {
      // Integer labels round-trip verbatim.
      std::vector<long> vals;
      vals.reserve(label_tokens.size());
      for (const std::string& t : label_tokens) {
        long v = 0;
        std::from_chars(t.data(), t.data() + t.size(), v);
        vals.push_back(v);
      }
      labels = std::move(vals);
    } else {
      labels = dense_label_map(label_tokens);
    }
  }
  return Dataset(std::move(slices), std::move(labels), std::move(names));
}

Dataset read_ts(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  long lineno = 0;
  std::optional<Index> dims;
  std::optional<Index> series_len;
  std::optional<bool> univariate;
  std::optional<bool> class_flag;
  std::vector<std::string> declared_labels;
  bool saw_data = false;

  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    if (t.front() != '@') {
      throw ParseError(lineno, 1, "unexpected content before @data: '" + line + "'");
    }
    std::vector<Token> words;
    for (const Token& w : split_tokens(t.substr(1), ' ', 2)) {
      if (!trim(w.text).empty()) {
        words.push_back(w);
      }
    }
    const std::string tag = lowercase(trim(words[0].text));
    if (tag == "data") {
      saw_data = true;
      break;
    }
    if (tag == "univariate") {
      if (words.size() < 2) {
        throw ParseError(lineno, 1, "@univariate needs a true/false value");
      }
      univariate = parse_bool(words[1].text, lineno, words[1].column);
    } else if (tag == "dimensions") {
      if (words.size() < 2) {
        throw ParseError(lineno, 1, "@dimensions needs a count");
      }
      dims = parse_nonneg(words[1], lineno, "dimension count");
      if (*dims < 1) {
        throw ParseError(lineno, words[1].column, "@dimensions must be >= 1");
      }
    } else if (tag == "equallength") {
      if (words.size() >= 2 && !parse_bool(words[1].text, lineno, words[1].column)) {
        throw UnsupportedFeatureError(
            "variable-length series (@equallength false) are not supported; "
            "only equal-length .ts files load");
      }
    } else if (tag == "serieslength") {
      if (words.size() < 2) {
        throw ParseError(lineno, 1, "@serieslength needs a count");
      }
      series_len = parse_nonneg(words[1], lineno, "series length");
      if (*series_len < 1) {
        throw ParseError(lineno, words[1].column, "@serieslength must be >= 1");
      }
    } else if (tag == "classlabel") {
      if (words.size() < 2) {
        throw ParseError(lineno, 1, "@classlabel needs true/false");
      }
      class_flag = parse_bool(words[1].text, lineno, words[1].column);
      if (*class_flag) {
        for (std::size_t i = 2; i < words.size(); ++i) {
          declared_labels.emplace_back(trim(words[i].text));
        }
      }
    } else if (tag == "timestamps") {
      if (words.size() >= 2 && parse_bool(words[1].text, lineno, words[1].column)) {
        throw UnsupportedFeatureError("timestamped .ts data is not supported");
      }
    }
    // other metadata (@problemname, @missing, ...) carries no structure we need
  }

  if (!saw_data) {
    throw MetadataMissingError("no @data line found in " + path.string());
  }
  Index d = 0;
  if (dims) {
    d = *dims;
    if (univariate && *univariate && d != 1) {
      throw MetadataMissingError("@univariate true conflicts with @dimensions " +
                                 std::to_string(d));
    }
  } else if (univariate && *univariate) {
    d = 1;
  } else {
    throw MetadataMissingError("dimension count unknown: need @dimensions or @univariate true");
  }
  if (!series_len) {
    throw MetadataMissingError("@serieslength is required (equal-length series only)");
  }
  if (!class_flag) {
    throw MetadataMissingError("@classlabel is required (true with a label set, or false)");
  }
  const Index n_count = *series_len;

  std::vector<std::vector<double>> cases;  // per case, variable-major: v * N + n
  std::vector<std::string> case_labels;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (trim(line).empty() || line.front() == '#') {
      continue;
    }
    const auto segs = split_tokens(line, ':');
    const std::size_t expected = static_cast<std::size_t>(d) + (*class_flag ? 1 : 0);
    if (segs.size() != expected) {
      throw ParseError(lineno, 1, "expected " + std::to_string(expected) +
                                      " ':'-separated segments, got " +
                                      std::to_string(segs.size()));
    }
    std::vector<double> values(static_cast<std::size_t>(d * n_count));
    for (Index v = 0; v < d; ++v) {
      const Token& seg = segs[static_cast<std::size_t>(v)];
      const auto toks = split_tokens(seg.text, ',', seg.column);
      if (static_cast<Index>(toks.size()) != n_count) {
        throw ParseError(lineno, seg.column,
                         "dimension " + std::to_string(v) + " has " +
                             std::to_string(toks.size()) + " values, expected " +
                             std::to_string(n_count));
      }
      for (Index n = 0; n < n_count; ++n) {
        values[static_cast<std::size_t>(v * n_count + n)] =
            parse_double(toks[static_cast<std::size_t>(n)], lineno);
      }
    }
    if (*class_flag) {
      const Token& seg = segs.back();
      const std::string label(trim(seg.text));
      if (label.empty()) {
        throw ParseError(lineno, seg.column, "empty class label");
      }
      if (!declared_labels.empty() &&
          std::find(declared_labels.begin(), declared_labels.end(), label) ==
              declared_labels.end()) {
        throw ParseError(lineno, seg.column,
                         "label '" + label + "' is not in the declared class set");
      }
      case_labels.push_back(label);
    }
    cases.push_back(std::move(values));
  }
  if (cases.empty()) {
    throw ParseError(lineno + 1, 1, "no data cases after @data");
  }

  const Index b_count = static_cast<Index>(cases.size());
  std::vector<Eigen::MatrixXd> slices(static_cast<std::size_t>(n_count),
                                      Eigen::MatrixXd(b_count, d));
  for (Index bi = 0; bi < b_count; ++bi) {
    for (Index v = 0; v < d; ++v) {
      for (Index n = 0; n < n_count; ++n) {
        slices[static_cast<std::size_t>(n)](bi, v) =
            cases[static_cast<std::size_t>(bi)][static_cast<std::size_t>(v * n_count + n)];
      }
    }
  }
  std::optional<std::vector<long>> labels;
  if (*class_flag) {
    labels = dense_label_map(case_labels);
  }
  return Dataset(std::move(slices), std::move(labels));
}

void write_csv(const Dataset& ds, const fs::path& path) {
  const Index d = ds.variables();
  std::string out = "instance,time";
  const bool have_names = static_cast<Index>(ds.variable_names().size()) == d;
  for (Index v = 0; v < d; ++v) {
    out += ',';
    out += have_names ? ds.variable_names()[static_cast<std::size_t>(v)] : default_name(v);
  }
  if (ds.labels()) {
    out += ",label";
  }
  out += '\n';
  for (Index bi = 0; bi < ds.instances(); ++bi) {
    for (Index n = 0; n < ds.length(); ++n) {
      out += std::to_string(bi);
      out += ',';
      out += std::to_string(n);
      for (Index v = 0; v < d; ++v) {
        out += ',';
        out += format_double(ds.at(bi, n, v));
      }
      if (ds.labels()) {
        out += ',';
        out += std::to_string((*ds.labels())[static_cast<std::size_t>(bi)]);
      }
      out += '\n';
    }
  }
  atomic_write(path, out);
}

void write_compact(const CompactRepresentation& rep, const fs::path& path) {
  std::string out = "instance,time";
  for (Index c = 0; c < rep.components(); ++c) {
    out += ",c" + std::to_string(c);
  }
  out += '\n';
  for (Index bi = 0; bi < rep.instances(); ++bi) {
    for (Index n = 0; n < rep.length(); ++n) {
      out += std::to_string(bi);
      out += ',';
      out += std::to_string(n);
      const Eigen::MatrixXd& slice = rep.values[static_cast<std::size_t>(n)];
      for (Index c = 0; c < rep.components(); ++c) {
        out += ',';
        out += format_double(slice(bi, c));
      }
      out += '\n';
    }
  }
  atomic_write(path, out);

  nlohmann::json meta;
  meta["config"] = {
      {"time_batch", rep.config.time_batch},
      {"components", rep.config.components},
      {"tol", rep.config.tol},
      {"max_inner_iters", rep.config.max_inner_iters},
      {"seed", rep.config.seed},
      {"pooling", rep.config.pooling == Pooling::none ? "none" : "mean-over-batch"},
      {"counter", rep.config.counter == CounterMode::global ? "global" : "per-batch"},
  };
  meta["eigen_trajectory"] = nlohmann::json::array();
  for (const auto& [batch, lambda] : rep.eigen_trajectory) {
    nlohmann::json entry;
    entry["batch"] = batch;
    entry["lambda"] = std::vector<double>(lambda.data(), lambda.data() + lambda.size());
    meta["eigen_trajectory"].push_back(std::move(entry));
  }
  meta["reports"] = nlohmann::json::array();
  for (const BatchReports& br : rep.reports) {
    nlohmann::json entry;
    entry["batch"] = br.batch_index;
    entry["points"] = nlohmann::json::array();
    for (const InnerIterationReport& r : br.points) {
      entry["points"].push_back({{"time_index", r.time_index},
                                 {"sweeps", r.sweeps_used},
                                 {"delta", r.final_subspace_delta},
                                 {"converged", r.converged}});
    }
    meta["reports"].push_back(std::move(entry));
  }
  atomic_write(sidecar_path(path), meta.dump(2) + "\n");
}

}  // namespace tspca
