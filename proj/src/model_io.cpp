#include <cstring>
#include <fstream>

#include "reldet/errors.hpp"
#include "reldet/nn.hpp"

namespace reldet {

namespace {

constexpr char kMagic[8] = {'R', 'D', 'E', 'T', 'M', '0', '1', '\n'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& out, const void* p, std::size_t len) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

void put_u32(std::ostream& out, std::uint32_t v) { put_bytes(out, &v, 4); }
void put_u64(std::ostream& out, std::uint64_t v) { put_bytes(out, &v, 8); }
void put_f64v(std::ostream& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  put_bytes(out, v.data(), v.size() * sizeof(double));
}
void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}

void get_bytes(std::istream& in, void* p, std::size_t len) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len))
    throw ModelError("model file is truncated");
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v;
  get_bytes(in, &v, 4);
  return v;
}
std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v;
  get_bytes(in, &v, 8);
  return v;
}
std::vector<double> get_f64v(std::istream& in, std::uint64_t limit) {
  std::uint64_t count = get_u64(in);
  if (count > limit) throw ModelError("model file has an implausible tensor");
  std::vector<double> v(count);
  get_bytes(in, v.data(), count * sizeof(double));
  return v;
}
std::string get_str(std::istream& in) {
  std::uint32_t len = get_u32(in);
  if (len > (1u << 20)) throw ModelError("model file has an implausible string");
  std::string s(len, '\0');
  get_bytes(in, s.data(), len);
  return s;
}

void put_bank(std::ostream& out, const FilterBank& b) {
  put_u64(out, b.h);
  put_u64(out, b.width);
  put_u64(out, b.count);
  put_f64v(out, b.weights);
  put_f64v(out, b.bias);
}

FilterBank get_bank(std::istream& in) {
  FilterBank b;
  b.h = get_u64(in);
  b.width = get_u64(in);
  b.count = get_u64(in);
  b.weights = get_f64v(in, 1ull << 32);
  b.bias = get_f64v(in, 1ull << 32);
  if (b.weights.size() != b.h * b.width * b.count ||
      b.bias.size() != b.count)
    throw ModelError("model file has an inconsistent filter bank");
  return b;
}

}  // namespace

void save_model(const ModelParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot open \"" + path + "\" for writing");
  put_bytes(out, kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(p.variant));
  put_u64(out, p.feature_fingerprint);
  put_u64(out, p.spec_fingerprint);
  put_u32(out, static_cast<std::uint32_t>(p.window));
  put_u32(out, static_cast<std::uint32_t>(p.scaling));
  put_u64(out, p.shape.m);
  put_u64(out, p.shape.n);
  put_u64(out, p.shape.keyword_count);
  put_u64(out, p.shape.text_filters_h3);
  put_u64(out, p.shape.text_filters_h4);
  put_u64(out, p.shape.text_filters_h5);
  put_u64(out, p.shape.knowledge_filters);
  put_u64(out, p.shape.dense_units);
  put_u64(out, p.min_freq);
  put_u32(out, p.stem ? 1 : 0);
  put_u64(out, p.stopwords_hash);
  put_u64(out, p.vocab.words.size());
  for (const auto& w : p.vocab.words) put_str(out, w);
  put_u32(out, static_cast<std::uint32_t>(p.text_banks.size()));
  if (!p.text_banks.empty()) {
    put_u64(out, p.embedding.rows);
    put_u64(out, p.embedding.dim);
    put_f64v(out, p.embedding.data);
    for (const auto& b : p.text_banks) put_bank(out, b);
  }
  put_u32(out, p.has_knowledge() ? 1 : 0);
  if (p.has_knowledge()) put_bank(out, p.knowledge_bank);
  put_f64v(out, p.dense_w);
  put_f64v(out, p.dense_b);
  put_f64v(out, p.out_w);
  put_bytes(out, &p.out_b, sizeof(double));
  if (!out) throw ModelError("failed writing model to \"" + path + "\"");
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file \"" + path + "\"");
  char magic[8];
  get_bytes(in, magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ModelError("not a model file (bad magic bytes)");
  std::uint32_t version = get_u32(in);
  if (version != kVersion)
    throw ModelError("unsupported model version " + std::to_string(version));
  ModelParams p;
  std::uint32_t variant = get_u32(in);
  if (variant > 2) throw ModelError("model file has an unknown variant tag");
  p.variant = static_cast<Variant>(variant);
  p.feature_fingerprint = get_u64(in);
  p.spec_fingerprint = get_u64(in);
  if (p.feature_fingerprint == 0 || p.spec_fingerprint == 0)
    throw ModelError("model file carries no pipeline fingerprint");
  p.window = static_cast<int>(get_u32(in));
  std::uint32_t scaling = get_u32(in);
  if (scaling > 1) throw ModelError("model file has an unknown scaling mode");
  p.scaling = static_cast<EikScaling>(scaling);
  p.shape.m = get_u64(in);
  p.shape.n = get_u64(in);
  p.shape.keyword_count = get_u64(in);
  p.shape.text_filters_h3 = get_u64(in);
  p.shape.text_filters_h4 = get_u64(in);
  p.shape.text_filters_h5 = get_u64(in);
  p.shape.knowledge_filters = get_u64(in);
  p.shape.dense_units = get_u64(in);
  p.min_freq = get_u64(in);
  p.stem = get_u32(in) != 0;
  p.stopwords_hash = get_u64(in);
  std::uint64_t vocab_count = get_u64(in);
  if (vocab_count > (1ull << 32))
    throw ModelError("model file has an implausible vocabulary");
  p.vocab.words.reserve(vocab_count);
  for (std::uint64_t i = 0; i < vocab_count; ++i)
    p.vocab.words.push_back(get_str(in));
  for (std::size_t i = 0; i < p.vocab.words.size(); ++i)
    p.vocab.index.emplace(p.vocab.words[i], static_cast<std::int32_t>(i));
  std::uint32_t n_text_banks = get_u32(in);
  if (n_text_banks != 0 && n_text_banks != 3)
    throw ModelError("model file has an unexpected text bank layout");
  if (n_text_banks == 3) {
    p.embedding.rows = get_u64(in);
    p.embedding.dim = get_u64(in);
    p.embedding.data = get_f64v(in, 1ull << 34);
    if (p.embedding.data.size() != p.embedding.rows * p.embedding.dim)
      throw ModelError("model file has an inconsistent embedding table");
    for (int b = 0; b < 3; ++b) p.text_banks.push_back(get_bank(in));
  }
  std::uint32_t has_knowledge = get_u32(in);
  if (has_knowledge) p.knowledge_bank = get_bank(in);
  p.dense_w = get_f64v(in, 1ull << 32);
  p.dense_b = get_f64v(in, 1ull << 32);
  p.out_w = get_f64v(in, 1ull << 32);
  get_bytes(in, &p.out_b, sizeof(double));
  char extra;
  if (in.read(&extra, 1), in.gcount() != 0)
    throw ModelError("model file has trailing bytes");

  const bool text_ok = (p.variant == Variant::IKOM) == (n_text_banks == 0);
  const bool know_ok =
      (p.variant == Variant::TEXT_ONLY) == (has_knowledge == 0);
  if (!text_ok || !know_ok)
    throw ModelError("model file sections do not match its variant tag");
  const std::size_t pooled = p.pooled_count();
  if (p.dense_w.size() != p.shape.dense_units * pooled ||
      p.dense_b.size() != p.shape.dense_units ||
      p.out_w.size() != p.shape.dense_units)
    throw ModelError("model file has inconsistent dense layer shapes");
  return p;
}

}  // namespace reldet
