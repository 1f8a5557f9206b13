#include "cubicml/predictor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <utility>

#include "cubicml/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace cubicml {

namespace {

constexpr char kMagic[4] = {'C', 'B', 'M', 'L'};
constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  explicit ByteWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void i32(std::int32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void f64_span(std::span<const double> values) {
    bytes(values.data(), values.size() * sizeof(double));
  }

  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw IoError("short write to " + path.string());
  }

 private:
  std::ofstream out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    buffer_.assign(std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>());
  }

  void bytes(void* dest, std::size_t n) {
    if (offset_ + n > buffer_.size()) {
      throw DataError("predictor snapshot truncated");
    }
    std::memcpy(dest, buffer_.data() + offset_, n);
    offset_ += n;
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::int32_t i32() { std::int32_t v; bytes(&v, 4); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  std::string str() {
    const std::uint32_t n = u32();
    if (offset_ + n > buffer_.size()) {
      throw DataError("predictor snapshot truncated");
    }
    std::string s(buffer_.data() + offset_, n);
    offset_ += n;
    return s;
  }
  void f64_into(std::span<double> dest) {
    bytes(dest.data(), dest.size() * sizeof(double));
  }
  bool exhausted() const { return offset_ == buffer_.size(); }

 private:
  std::vector<char> buffer_;
  std::size_t offset_ = 0;
};

}  // namespace

std::string to_string(PredictorBackend backend) {
  switch (backend) {
    case PredictorBackend::mlp_ensemble: return "mlp-ensemble";
    case PredictorBackend::gbdt: return "gbdt";
  }
  throw ValidationError("unknown predictor backend");
}

PredictorBackend backend_from_string(const std::string& text) {
  if (text == "mlp-ensemble") return PredictorBackend::mlp_ensemble;
  if (text == "gbdt") return PredictorBackend::gbdt;
  throw ValidationError("unknown predictor backend '" + text + "'");
}

ConfigScorer::ConfigScorer(SearchSpace space) : space_(std::move(space)) {
  onehot_ = onehot_layout(space_);
  mixed_ = mixed_layout(space_);
}

SparseVector ConfigScorer::encode_onehot_sparse(const ConfigPoint& point) const {
  const auto active = onehot_active_indices(space_, point);
  SparseVector sparse;
  sparse.reserve(active.size());
  for (std::uint32_t idx : active) sparse.emplace_back(idx, 1.0);
  return sparse;
}

ConfigScorer ConfigScorer::fit(const SearchSpace& space,
                               std::span<const JobRecord> records,
                               const ScorerConfig& config, std::uint64_t seed) {
  ConfigScorer scorer(space);
  scorer.backend_ = config.backend;

  std::vector<const JobRecord*> usable;
  for (const auto& record : records) {
    if (record.status != JobStatus::completed) continue;
    usable.push_back(&record);
  }
  if (usable.size() < 2) {
    throw DataError("predictor fit: need at least 2 completed jobs");
  }
  std::vector<double> metrics;
  metrics.reserve(usable.size());
  for (const JobRecord* record : usable) {
    check_record(*record);
    scorer.space_.check_config(record->config);
    metrics.push_back(*record->metric);
  }

  if (config.backend == PredictorBackend::mlp_ensemble) {
    std::vector<SparseVector> features;
    features.reserve(usable.size());
    for (const JobRecord* record : usable) {
      features.push_back(scorer.encode_onehot_sparse(record->config));
    }
    scorer.ensemble_ = EnsemblePredictor::fit(features, scorer.onehot_.length,
                                              metrics, config.ensemble, seed);
  } else {
    std::vector<std::vector<double>> rows;
    rows.reserve(usable.size());
    for (const JobRecord* record : usable) {
      rows.push_back(encode_mixed(scorer.space_, record->config));
    }
    scorer.gbdt_ =
        GbdtModel::fit(rows, metrics, scorer.mixed_, config.gbdt, seed);
  }
  return scorer;
}

double ConfigScorer::score(const ConfigPoint& point) const {
  space_.check_config(point);
  if (backend_ == PredictorBackend::mlp_ensemble) {
    return ensemble_->predict(encode_onehot_sparse(point));
  }
  return gbdt_->predict(encode_mixed(space_, point));
}

void ConfigScorer::save(const std::filesystem::path& path) const {
  ByteWriter w(path);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u8(backend_ == PredictorBackend::mlp_ensemble ? 0 : 1);
  w.str(space_.name());
  w.str(std::to_string(space_.version()));
  w.u32(static_cast<std::uint32_t>(space_.dimension_count()));

  if (backend_ == PredictorBackend::mlp_ensemble) {
    const auto& members = ensemble_->members();
    w.u32(static_cast<std::uint32_t>(members.size()));
    w.u32(members.front().input_dim());
    w.u32(members.front().hidden_dim());
    for (const auto& member : members) w.f64_span(member.parameters());
  } else {
    w.f64(gbdt_->base_value());
    w.f64(gbdt_->shrinkage());
    const auto& kinds = gbdt_->slot_kinds();
    w.u32(static_cast<std::uint32_t>(kinds.size()));
    for (SlotKind kind : kinds) w.u8(kind == SlotKind::numeric ? 0 : 1);
    w.u32(static_cast<std::uint32_t>(gbdt_->tree_count()));
    for (const auto& tree : gbdt_->trees()) {
      w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
      for (const auto& node : tree.nodes) {
        w.i32(node.slot);
        w.u8(node.categorical ? 1 : 0);
        w.f64(node.split);
        w.i32(node.left);
        w.i32(node.right);
        w.f64(node.value);
      }
    }
  }
  w.finish(path);
}

ConfigScorer ConfigScorer::load(const std::filesystem::path& path,
                                const SearchSpace& space) {
  ByteReader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a predictor snapshot: " + path.string());
  }
  if (r.u32() != kVersion) {
    throw DataError("unsupported predictor snapshot version");
  }
  const std::uint8_t backend_tag = r.u8();
  if (backend_tag > 1) throw DataError("unknown backend in snapshot");

  const std::string name = r.str();
  const std::string version = r.str();
  const std::uint32_t dims = r.u32();
  if (name != space.name() || version != std::to_string(space.version()) ||
      dims != space.dimension_count()) {
    throw DataError("predictor snapshot was fit on a different space");
  }

  ConfigScorer scorer(space);
  scorer.backend_ = backend_tag == 0 ? PredictorBackend::mlp_ensemble
                                     : PredictorBackend::gbdt;

  if (scorer.backend_ == PredictorBackend::mlp_ensemble) {
    const std::uint32_t members = r.u32();
    const std::uint32_t input_dim = r.u32();
    const std::uint32_t hidden_dim = r.u32();
    if (members == 0) throw DataError("snapshot has no ensemble members");
    if (input_dim != scorer.onehot_.length) {
      throw DataError("snapshot input width does not match space encoding");
    }
    std::vector<MlpModel> loaded;
    loaded.reserve(members);
    for (std::uint32_t m = 0; m < members; ++m) {
      MlpModel model(input_dim, hidden_dim, 0);
      r.f64_into(model.parameters());
      loaded.push_back(std::move(model));
    }
    scorer.ensemble_ = EnsemblePredictor::from_members(std::move(loaded));
  } else {
    const double base = r.f64();
    const double shrinkage = r.f64();
    const std::uint32_t slot_count = r.u32();
    if (slot_count != scorer.mixed_.slots.size()) {
      throw DataError("snapshot slot count does not match space encoding");
    }
    std::vector<SlotKind> kinds;
    kinds.reserve(slot_count);
    for (std::uint32_t s = 0; s < slot_count; ++s) {
      kinds.push_back(r.u8() == 0 ? SlotKind::numeric : SlotKind::categorical);
    }
    const std::uint32_t tree_count = r.u32();
    std::vector<GbdtModel::Tree> trees;
    trees.reserve(tree_count);
    for (std::uint32_t t = 0; t < tree_count; ++t) {
      GbdtModel::Tree tree;
      tree.nodes.resize(r.u32());
      for (auto& node : tree.nodes) {
        node.slot = r.i32();
        node.categorical = r.u8() != 0;
        node.split = r.f64();
        node.left = r.i32();
        node.right = r.i32();
        node.value = r.f64();
      }
      trees.push_back(std::move(tree));
    }
    scorer.gbdt_ = GbdtModel::from_parts(base, shrinkage, std::move(kinds),
                                         std::move(trees));
  }
  if (!r.exhausted()) throw DataError("trailing bytes in predictor snapshot");
  return scorer;
}

}  // namespace cubicml
