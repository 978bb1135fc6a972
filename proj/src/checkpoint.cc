#include "xlene/checkpoint.h"

#include <fstream>
#include <sstream>

#include "xlene/binio.h"
#include "xlene/error.h"

namespace xlene {

namespace {

void put_tensors(std::ostream& out, const ModelTensors<float>& t) {
  for (const Matrix<float>* m : t.tensors()) binio::put_floats(out, m->data);
}

void get_tensors(std::istream& in, ModelTensors<float>& t) {
  auto list = t.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    binio::get_floats(in, list[i]->data, kTensorNames[i].data());
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const ModelSpec& s = ckpt.model.spec;
  out.write("HMCN", 4);
  binio::put_u32(out, kCheckpointVersion);
  binio::put_u64(out, ckpt.taxonomy_hash);
  for (std::uint64_t v : {std::uint64_t{s.vocab}, std::uint64_t{s.embed_dim},
                          std::uint64_t{s.hidden_dim}, std::uint64_t{s.dims.coarse},
                          std::uint64_t{s.dims.mid}, std::uint64_t{s.dims.fine},
                          std::uint64_t{static_cast<std::uint32_t>(s.head.kind)},
                          std::uint64_t{static_cast<std::uint32_t>(s.head.feedback)}}) {
    binio::put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_tensors(out, ckpt.model.params);
  binio::put_u32(out, ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const AdamState& a = *ckpt.optimizer;
    binio::put_u64(out, a.step);
    binio::put_f64(out, a.config.learning_rate);
    binio::put_f64(out, a.config.beta1);
    binio::put_f64(out, a.config.beta2);
    binio::put_f64(out, a.config.eps);
    put_tensors(out, a.m);
    put_tensors(out, a.v);
  }
  binio::put_u32(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  out.write(ckpt.metadata.data(), static_cast<std::streamsize>(ckpt.metadata.size()));
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  write_checkpoint(out, ckpt);
  if (!out) throw DataError("error writing checkpoint: " + path);
}

Checkpoint read_checkpoint(std::istream& in, std::optional<std::uint64_t> expected_hash) {
  char magic[4];
  binio::get_bytes(in, magic, 4, "checkpoint magic");
  if (std::string(magic, 4) != "HMCN") throw DataError("not a checkpoint: bad magic");
  std::uint32_t version = binio::get_u32(in, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.taxonomy_hash = binio::get_u64(in, "taxonomy hash");
  if (expected_hash && *expected_hash != ckpt.taxonomy_hash) {
    throw DataError("checkpoint was trained on a different taxonomy (hash mismatch)");
  }
  ModelSpec& s = ckpt.model.spec;
  s.vocab = binio::get_u32(in, "dims");
  s.embed_dim = binio::get_u32(in, "dims");
  s.hidden_dim = binio::get_u32(in, "dims");
  s.dims.coarse = binio::get_u32(in, "dims");
  s.dims.mid = binio::get_u32(in, "dims");
  s.dims.fine = binio::get_u32(in, "dims");
  std::uint32_t kind = binio::get_u32(in, "dims");
  std::uint32_t feedback = binio::get_u32(in, "dims");
  if (kind > 1 || feedback > 1) throw DataError("checkpoint has unknown head options");
  s.head = {static_cast<HeadKind>(kind), static_cast<Feedback>(feedback)};
  if (s.hidden_dim == 0 || (s.has_encoder() && (s.vocab < 3 || s.embed_dim == 0))) {
    throw DataError("checkpoint has invalid dimensions");
  }

  if (s.has_encoder()) {
    ckpt.model.params.encoder = make_encoder(s.vocab, s.embed_dim, s.hidden_dim);
  }
  ckpt.model.params.head = make_head(s.hidden_dim, s.dims, s.head.kind);
  get_tensors(in, ckpt.model.params);

  std::uint32_t has_opt = binio::get_u32(in, "optimizer flag");
  if (has_opt > 1) throw DataError("checkpoint has a corrupt optimizer flag");
  if (has_opt) {
    AdamState a = make_adam_state(ckpt.model.params, {});
    a.step = binio::get_u64(in, "optimizer step");
    a.config.learning_rate = binio::get_f64(in, "optimizer config");
    a.config.beta1 = binio::get_f64(in, "optimizer config");
    a.config.beta2 = binio::get_f64(in, "optimizer config");
    a.config.eps = binio::get_f64(in, "optimizer config");
    get_tensors(in, a.m);
    get_tensors(in, a.v);
    ckpt.optimizer = std::move(a);
  }
  std::uint32_t meta_len = binio::get_u32(in, "metadata length");
  ckpt.metadata.resize(meta_len);
  binio::get_bytes(in, ckpt.metadata.data(), meta_len, "metadata");
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path,
                           std::optional<std::uint64_t> expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  try {
    return read_checkpoint(in, expected_hash);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace xlene
