#include <charconv>

#include <nlohmann/json.hpp>

#include "safechat/classify.hpp"
#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/text.hpp"

// Layout: "MTMB1", then sections of [4-byte tag][u64 length][payload].
//   CONF  JSON: preprocessing flags and per-task settings
//   per task, in Task order: VOCB IDF_ DWRD DOCV WOUT HEAD
//   END_
namespace safechat::classify {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "MTMB1";
constexpr int kFormatVersion = 1;

json dbow_config_json(const features::TrainingConfig& c) {
  return {{"dim", c.dim},         {"epochs", c.epochs},       {"negative", c.negative},
          {"alpha", c.alpha},     {"alpha_min", c.alpha_min}, {"min_df", c.min_df},
          {"seed", c.seed},       {"noise_exponent", c.noise_exponent},
          {"sample", c.sample}};
}

features::TrainingConfig dbow_config_from(const json& j) {
  features::TrainingConfig c;
  c.dim = j.at("dim").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.negative = j.at("negative").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  c.alpha_min = j.at("alpha_min").get<double>();
  c.min_df = j.at("min_df").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.noise_exponent = j.at("noise_exponent").get<double>();
  c.sample = j.at("sample").get<double>();
  return c;
}

json preprocess_json(const preprocess::PipelineConfig& c) {
  return {{"contractions", c.contractions}, {"special_chars", c.special_chars},
          {"spelling", c.spelling},         {"negation", c.negation},
          {"lemmatize", c.lemmatize},       {"lowercase", c.lowercase},
          {"mode", c.mode == preprocess::Mode::ner ? "ner" : "classify"}};
}

preprocess::PipelineConfig preprocess_from(const json& j) {
  preprocess::PipelineConfig c;
  c.contractions = j.at("contractions").get<bool>();
  c.special_chars = j.at("special_chars").get<bool>();
  c.spelling = j.at("spelling").get<bool>();
  c.negation = j.at("negation").get<bool>();
  c.lemmatize = j.at("lemmatize").get<bool>();
  c.lowercase = j.at("lowercase").get<bool>();
  c.mode = j.at("mode").get<std::string>() == "ner" ? preprocess::Mode::ner
                                                    : preprocess::Mode::classify;
  return c;
}

void section(io::BinaryWriter& out, std::string_view tag, std::string_view payload) {
  out.bytes(tag);
  out.u64(payload.size());
  out.bytes(payload);
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(Errc::bad_format, "bundle: bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto nl = s.find('\n', pos);
    if (nl == std::string_view::npos) nl = s.size();
    out.push_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

std::pair<std::string_view, std::string_view> split_tab(std::string_view line) {
  const auto tab = line.rfind('\t');
  if (tab == std::string_view::npos) throw Error(Errc::bad_format, "bundle: missing tab");
  return {line.substr(0, tab), line.substr(tab + 1)};
}

void write_head(io::BinaryWriter& out, const LogisticModel& m) {
  out.u8(static_cast<std::uint8_t>(m.kind));
  out.u64(m.weights.size());
  out.f64s(m.weights);
  out.f64(m.bias);
}

LogisticModel read_head(io::BinaryReader& in) {
  LogisticModel m;
  const auto kind = in.u8();
  if (kind > 1) throw Error(Errc::bad_format, "bundle: unknown head kind");
  m.kind = static_cast<FeatureKind>(kind);
  const auto n = in.u64();
  if (n > in.remaining() / 8) throw Error(Errc::bad_format, "bundle: head size exceeds data");
  m.weights = in.f64s(n);
  m.bias = in.f64();
  return m;
}

class SectionReader {
 public:
  explicit SectionReader(io::BinaryReader& in) : in_(in) {}

  std::string_view expect(std::string_view tag) {
    const auto got = in_.bytes(4);
    if (got != tag) {
      throw Error(Errc::bad_format, "bundle: expected section " + std::string(tag) + ", found " +
                                        std::string(got));
    }
    const auto len = in_.u64();
    if (len > in_.remaining()) throw Error(Errc::bad_format, "bundle: truncated " + std::string(tag));
    return in_.bytes(len);
  }

 private:
  io::BinaryReader& in_;
};

}  // namespace

std::string serialize_bundle(const EnsembleClassifier& e) {
  if (!e.trained()) throw Error(Errc::invalid_config, "bundle: classifier is not trained");
  json conf;
  conf["format"] = kFormatVersion;
  conf["preprocess"] = preprocess_json(e.preprocess_config());
  conf["tasks"] = json::array();
  for (auto t : kTasks) {
    const auto& p = e.task(t);
    conf["tasks"].push_back({{"name", task_name(t)},
                             {"cutoff", p.cutoff},
                             {"infer_steps", p.infer_steps},
                             {"dbow", dbow_config_json(p.dbow.config())},
                             {"dbow_epoch_losses", p.dbow.epoch_losses()}});
  }

  io::BinaryWriter out;
  out.bytes(kMagic);
  section(out, "CONF", conf.dump());
  for (auto t : kTasks) {
    const auto& p = e.task(t);
    const auto& vocab = p.tfidf.vocabulary();

    std::string vocb = std::to_string(vocab.corpus_size()) + '\t' +
                       std::to_string(vocab.ngram_max()) + '\t' + std::to_string(vocab.min_df()) +
                       '\n';
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
      vocb += vocab.ngram(i) + '\t' + std::to_string(vocab.df(i)) + '\n';
    }
    section(out, "VOCB", vocb);

    io::BinaryWriter idf;
    idf.f64s(p.tfidf.idf());
    section(out, "IDF_", idf.data());

    std::string words;
    const auto counts = p.dbow.word_counts();
    for (std::size_t i = 0; i < p.dbow.vocab_size(); ++i) {
      words += p.dbow.words()[i] + '\t' + std::to_string(counts[i]) + '\n';
    }
    section(out, "DWRD", words);

    io::BinaryWriter docv;
    docv.u64(p.dbow.num_docs());
    docv.f64s(p.dbow.doc_matrix());
    section(out, "DOCV", docv.data());

    io::BinaryWriter wout;
    wout.f64s(p.dbow.output_matrix());
    section(out, "WOUT", wout.data());

    io::BinaryWriter head;
    write_head(head, p.tfidf_head);
    write_head(head, p.dbow_head);
    section(out, "HEAD", head.data());
  }
  section(out, "END_", "");
  return out.data();
}

void save_bundle(const EnsembleClassifier& e, const std::filesystem::path& path) {
  io::write_file(path, serialize_bundle(e));
}

EnsembleClassifier deserialize_bundle(std::string_view bytes, preprocess::Resources resources) {
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error(Errc::bad_format, "bundle: missing MTMB1 header");
  }
  io::BinaryReader in(bytes.substr(kMagic.size()));
  SectionReader sections(in);

  json conf;
  try {
    conf = json::parse(sections.expect("CONF"));
  } catch (const json::exception& ex) {
    throw Error(Errc::bad_format, std::string("bundle: CONF is not valid JSON: ") + ex.what());
  }

  try {
    if (conf.at("format").get<int>() != kFormatVersion) {
      throw Error(Errc::bad_format, "bundle: unsupported format version");
    }
    const auto config = preprocess_from(conf.at("preprocess"));
    const auto& tasks = conf.at("tasks");
    if (!tasks.is_array() || tasks.size() != kTasks.size()) {
      throw Error(Errc::bad_format, "bundle: expected four tasks");
    }

    std::array<TaskPipeline, 4> pipelines;
    for (auto t : kTasks) {
      const auto& tj = tasks.at(static_cast<std::size_t>(t));
      if (tj.at("name").get<std::string>() != task_name(t)) {
        throw Error(Errc::bad_format, "bundle: task order mismatch");
      }
      auto& p = pipelines[static_cast<std::size_t>(t)];
      p.cutoff = tj.at("cutoff").get<double>();
      p.infer_steps = tj.at("infer_steps").get<std::size_t>();
      const auto dbow_cfg = dbow_config_from(tj.at("dbow"));
      auto losses = tj.at("dbow_epoch_losses").get<std::vector<double>>();

      const auto vlines = lines_of(sections.expect("VOCB"));
      if (vlines.empty()) throw Error(Errc::bad_format, "bundle: empty VOCB");
      const auto meta = text::split_whitespace(vlines[0]);
      if (meta.size() != 3) throw Error(Errc::bad_format, "bundle: bad VOCB header");
      std::vector<std::string> grams;
      std::vector<std::uint64_t> df;
      for (std::size_t i = 1; i < vlines.size(); ++i) {
        auto [g, d] = split_tab(vlines[i]);
        grams.emplace_back(g);
        df.push_back(parse_u64(d, "df"));
      }
      auto vocab = features::Vocabulary::from_parts(
          std::move(grams), std::move(df), parse_u64(meta[0], "corpus size"),
          parse_u64(meta[1], "ngram_max"), parse_u64(meta[2], "min_df"));

      const auto idf_bytes = sections.expect("IDF_");
      if (idf_bytes.size() != vocab.size() * 8) throw Error(Errc::bad_format, "bundle: IDF_ size");
      io::BinaryReader idf_in(idf_bytes);
      p.tfidf = features::TfIdfVectorizer(std::move(vocab), idf_in.f64s(idf_bytes.size() / 8));

      std::vector<std::string> words;
      std::vector<std::uint64_t> counts;
      for (auto line : lines_of(sections.expect("DWRD"))) {
        auto [w, c] = split_tab(line);
        words.emplace_back(w);
        counts.push_back(parse_u64(c, "word count"));
      }

      io::BinaryReader docv(sections.expect("DOCV"));
      const auto num_docs = docv.u64();
      if (docv.remaining() != num_docs * dbow_cfg.dim * 8) {
        throw Error(Errc::bad_format, "bundle: DOCV size");
      }
      auto doc_vectors = docv.f64s(num_docs * dbow_cfg.dim);

      const auto wout_bytes = sections.expect("WOUT");
      if (wout_bytes.size() % 8 != 0) throw Error(Errc::bad_format, "bundle: WOUT size");
      io::BinaryReader wout(wout_bytes);
      auto out_vectors = wout.f64s(wout_bytes.size() / 8);

      p.dbow = features::DocEmbeddingModel::from_parts(dbow_cfg, std::move(words),
                                                       std::move(counts), num_docs,
                                                       std::move(doc_vectors),
                                                       std::move(out_vectors), std::move(losses));

      io::BinaryReader head(sections.expect("HEAD"));
      p.tfidf_head = read_head(head);
      p.dbow_head = read_head(head);
      if (p.tfidf_head.kind != FeatureKind::tfidf || p.dbow_head.kind != FeatureKind::dbow) {
        throw Error(Errc::bad_format, "bundle: head kinds out of order");
      }
    }
    sections.expect("END_");
    return EnsembleClassifier(config, std::move(pipelines), std::move(resources));
  } catch (const json::exception& ex) {
    throw Error(Errc::bad_format, std::string("bundle: CONF: ") + ex.what());
  }
}

EnsembleClassifier load_bundle(const std::filesystem::path& path, preprocess::Resources resources) {
  return deserialize_bundle(io::read_file(path), std::move(resources));
}

}  // namespace safechat::classify
