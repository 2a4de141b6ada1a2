#include <algorithm>
#include <cmath>

#include "safechat/classify.hpp"
#include "safechat/csv.hpp"
#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/rng.hpp"
#include "safechat/text.hpp"

namespace safechat::classify {

std::string_view task_name(Task t) noexcept {
  switch (t) {
    case Task::harassment: return "HARASSMENT_OR_NOT";
    case Task::verbal: return "VERBAL";
    case Task::non_verbal: return "NON_VERBAL";
    case Task::physical: return "PHYSICAL";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) noexcept {
  for (auto t : kTasks) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

std::string_view type_name(HarassmentType t) noexcept {
  switch (t) {
    case HarassmentType::verbal: return "VERBAL";
    case HarassmentType::non_verbal: return "NON_VERBAL";
    case HarassmentType::physical: return "PHYSICAL";
  }
  return "?";
}

std::optional<HarassmentType> type_of(Task t) noexcept {
  switch (t) {
    case Task::verbal: return HarassmentType::verbal;
    case Task::non_verbal: return HarassmentType::non_verbal;
    case Task::physical: return HarassmentType::physical;
    case Task::harassment: break;
  }
  return std::nullopt;
}

std::vector<HarassmentType> TypeSet::ordered() const {
  std::vector<HarassmentType> out;
  for (auto t : {HarassmentType::physical, HarassmentType::verbal, HarassmentType::non_verbal}) {
    if (contains(t)) out.push_back(t);
  }
  return out;
}

bool target(const LabeledReport& r, Task task) noexcept {
  if (auto type = type_of(task)) return r.labels.contains(*type);
  return r.is_harassment;
}

namespace {

bool parse_flag(std::string_view field, std::size_t row, std::string_view column) {
  const auto v = text::to_lower(text::trim(field));
  if (v.empty() || v == "0" || v == "false" || v == "no" || v == "0.0") return false;
  if (v == "1" || v == "true" || v == "yes" || v == "1.0") return true;
  throw Error(Errc::parse, "corpus row " + std::to_string(row) + ": column '" +
                               std::string(column) + "' is not a 0/1 flag: '" +
                               std::string(field) + "'");
}

}  // namespace

std::vector<LabeledReport> load_corpus_csv(const std::filesystem::path& path) {
  const auto table = csv::read_table(path);
  const auto desc = table.column("description");
  const auto verbal = table.column("verbal");
  const auto nonverbal = table.column("nonverbal");
  const auto physical = table.column("physical");
  if (!desc || !verbal || !nonverbal || !physical) {
    throw Error(Errc::parse, path.string() +
                                 ": header must contain description, verbal, nonverbal, physical");
  }
  const auto serious = table.column("serious physical");

  std::vector<LabeledReport> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto field = [&](std::size_t c) -> std::string_view {
      return c < row.size() ? std::string_view(row[c]) : std::string_view();
    };
    LabeledReport rep;
    rep.text = std::string(text::trim(field(*desc)));
    if (rep.text.empty()) continue;
    rep.is_harassment = true;
    if (parse_flag(field(*verbal), r + 2, "verbal")) rep.labels.insert(HarassmentType::verbal);
    if (parse_flag(field(*nonverbal), r + 2, "nonverbal")) {
      rep.labels.insert(HarassmentType::non_verbal);
    }
    bool phys = parse_flag(field(*physical), r + 2, "physical");
    if (serious) phys = parse_flag(field(*serious), r + 2, "serious physical") || phys;
    if (phys) rep.labels.insert(HarassmentType::physical);
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<std::string> load_negatives(const std::filesystem::path& path) {
  const auto contents = io::read_file(path);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string::npos) nl = contents.size();
    const auto line = text::trim(std::string_view(contents).substr(pos, nl - pos));
    if (!line.empty()) out.emplace_back(line);
    pos = nl + 1;
  }
  return out;
}

std::vector<LabeledReport> balance_dataset(std::span<const LabeledReport> positives,
                                           std::span<const LabeledReport> negatives,
                                           std::uint64_t seed) {
  if (positives.empty() || negatives.empty()) {
    throw Error(Errc::empty_class, "balance_dataset: both classes must be non-empty (" +
                                       std::to_string(positives.size()) + " positive, " +
                                       std::to_string(negatives.size()) + " negative)");
  }
  Rng rng(seed);
  const std::size_t n = std::min(positives.size(), negatives.size());
  auto take = [&](std::span<const LabeledReport> cls, std::vector<LabeledReport>& out) {
    std::vector<std::size_t> idx(cls.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (cls.size() > n) {
      rng.shuffle(idx);
      idx.resize(n);
      std::sort(idx.begin(), idx.end());
    }
    for (auto i : idx) out.push_back(cls[i]);
  };
  std::vector<LabeledReport> out;
  out.reserve(2 * n);
  take(positives, out);
  take(negatives, out);
  rng.shuffle(out);
  return out;
}

Split stratified_split(std::span<const LabeledReport> data, Task task, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw Error(Errc::invalid_config, "stratified_split: test_fraction must be in (0, 1)");
  }
  std::array<std::vector<std::size_t>, 2> classes;
  for (std::size_t i = 0; i < data.size(); ++i) classes[target(data[i], task) ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (classes[c].size() < 2) {
      throw Error(Errc::class_too_small,
                  std::string("stratified_split: class ") + (c ? "positive" : "negative") +
                      " of " + std::string(task_name(task)) + " has " +
                      std::to_string(classes[c].size()) + " items, need at least 2");
    }
  }
  Rng rng(spec.seed);
  std::vector<std::uint8_t> in_test(data.size(), 0);
  for (auto& idx : classes) {
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(idx.size()) * spec.test_fraction + 0.5));
    for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = 1;
  }
  Split out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_test[i] ? out.test : out.train).push_back(data[i]);
  }
  return out;
}

void write_corpus_csv(std::span<const LabeledReport> reports, const std::filesystem::path& path) {
  std::string out = "description,verbal,nonverbal,physical\n";
  for (const auto& r : reports) {
    out += csv::escape(r.text);
    out += r.labels.contains(HarassmentType::verbal) ? ",1" : ",0";
    out += r.labels.contains(HarassmentType::non_verbal) ? ",1" : ",0";
    out += r.labels.contains(HarassmentType::physical) ? ",1\n" : ",0\n";
  }
  io::write_file(path, out);
}

void write_negatives(std::span<const std::string> docs, const std::filesystem::path& path) {
  std::string out;
  for (const auto& d : docs) {
    for (char c : d) out += (c == '\n' || c == '\r') ? ' ' : c;
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace safechat::classify
