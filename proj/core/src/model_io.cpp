#include "consum/model_io.hpp"

#include <bit>
#include <cstring>

#include <nlohmann/json.hpp>

#include "consum/io_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "model artifacts are little-endian; add byte swapping before "
              "building on a big-endian target");

namespace consum {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'C', 'N', 'S', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

void append_u32(std::string& out, std::uint32_t value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof value);
}

void append_u64(std::string& out, std::uint64_t value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof value);
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& context)
      : bytes_(bytes), context_(context) {}

  std::uint32_t u32() { return read_raw<std::uint32_t>(); }
  std::uint64_t u64() { return read_raw<std::uint64_t>(); }

  std::string str(std::size_t length) {
    require(length);
    std::string out = bytes_.substr(pos_, length);
    pos_ += length;
    return out;
  }

  void doubles(double* dest, std::size_t count) {
    require(count * sizeof(double));
    std::memcpy(dest, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }

  std::size_t position() const { return pos_; }

 private:
  template <typename T>
  T read_raw() {
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void require(std::size_t count) {
    if (pos_ + count > bytes_.size()) {
      throw ModelIoError(context_ + ": truncated artifact");
    }
  }

  const std::string& bytes_;
  std::string context_;
  std::size_t pos_ = 0;
};

void append_tensor(std::string& out, const std::string& name,
                   const Eigen::MatrixXd& tensor) {
  append_u32(out, static_cast<std::uint32_t>(name.size()));
  out.append(name);
  append_u64(out, static_cast<std::uint64_t>(tensor.rows()));
  append_u64(out, static_cast<std::uint64_t>(tensor.cols()));
  for (Eigen::Index i = 0; i < tensor.rows(); ++i) {
    for (Eigen::Index j = 0; j < tensor.cols(); ++j) {
      const double value = tensor(i, j);
      out.append(reinterpret_cast<const char*>(&value), sizeof value);
    }
  }
}

void write_artifact(const std::filesystem::path& path,
                    const std::string& kind_tag, const ordered_json& header,
                    const std::vector<const Eigen::MatrixXd*>& tensors,
                    const std::vector<std::string>& names) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  append_u32(out, kFormatVersion);
  char tag[4] = {};
  std::memcpy(tag, kind_tag.data(), std::min<std::size_t>(kind_tag.size(), 4));
  out.append(tag, sizeof tag);
  const std::string header_bytes = header.dump();
  append_u32(out, static_cast<std::uint32_t>(header_bytes.size()));
  out.append(header_bytes);
  append_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    append_tensor(out, names[i], *tensors[i]);
  }
  append_u64(out, io::fnv1a64(out));
  io::atomic_write_file(path, out);
}

struct Artifact {
  ordered_json header;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;
};

Artifact read_artifact(const std::filesystem::path& path,
                       const std::string& expected_kind) {
  const std::string context = "model artifact " + path.string();
  const std::string bytes = io::read_file(path);
  if (bytes.size() < sizeof kMagic + sizeof(std::uint32_t) + 4 +
                         sizeof(std::uint64_t)) {
    throw ModelIoError(context + ": truncated artifact");
  }

  // Validate the trailing checksum before trusting any field.
  const std::size_t payload_size = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored_checksum;
  std::memcpy(&stored_checksum, bytes.data() + payload_size,
              sizeof stored_checksum);
  const std::uint64_t computed =
      io::fnv1a64(std::string_view(bytes.data(), payload_size));
  if (stored_checksum != computed) {
    throw ModelIoError(context + ": checksum mismatch (corrupted or "
                                 "truncated artifact)");
  }

  Reader reader(bytes, context);
  if (reader.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw ModelIoError(context + ": bad magic (not a consum model artifact)");
  }
  const std::uint32_t version = reader.u32();
  if (version != kFormatVersion) {
    throw ModelIoError(context + ": unsupported format version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kFormatVersion) + ")");
  }
  std::string kind = reader.str(4);
  kind.erase(kind.find_last_not_of('\0') + 1);
  if (kind != expected_kind) {
    throw ModelIoError(context + ": model kind is '" + kind +
                       "', expected '" + expected_kind + "'");
  }

  Artifact artifact;
  const std::uint32_t header_length = reader.u32();
  try {
    artifact.header = ordered_json::parse(reader.str(header_length));
  } catch (const nlohmann::json::exception& e) {
    throw ModelIoError(context + ": malformed header: " + e.what());
  }
  const std::uint32_t tensor_count = reader.u32();
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    const std::uint32_t name_length = reader.u32();
    std::string name = reader.str(name_length);
    const auto rows = static_cast<Eigen::Index>(reader.u64());
    const auto cols = static_cast<Eigen::Index>(reader.u64());
    if (rows < 0 || cols < 0 || rows * cols > (1LL << 32)) {
      throw ModelIoError(context + ": implausible tensor shape");
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        tensor(rows, cols);
    reader.doubles(tensor.data(), static_cast<std::size_t>(rows * cols));
    artifact.tensors.emplace_back(std::move(name), Eigen::MatrixXd(tensor));
  }
  if (reader.position() != payload_size) {
    throw ModelIoError(context + ": trailing bytes after tensor data");
  }
  return artifact;
}

void assign_tensors(const Artifact& artifact,
                    const std::vector<Eigen::MatrixXd*>& params,
                    const std::vector<std::string>& names,
                    const std::string& context) {
  if (artifact.tensors.size() != params.size()) {
    throw ModelIoError(context + ": expected " +
                       std::to_string(params.size()) + " tensors, found " +
                       std::to_string(artifact.tensors.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = artifact.tensors[i];
    if (name != names[i]) {
      throw ModelIoError(context + ": tensor " + std::to_string(i) +
                         " is '" + name + "', expected '" + names[i] + "'");
    }
    if (tensor.rows() != params[i]->rows() ||
        tensor.cols() != params[i]->cols()) {
      throw ModelIoError(context + ": tensor '" + name + "' has shape " +
                         std::to_string(tensor.rows()) + "x" +
                         std::to_string(tensor.cols()) + ", expected " +
                         std::to_string(params[i]->rows()) + "x" +
                         std::to_string(params[i]->cols()));
    }
    *params[i] = tensor;
  }
}

int header_int(const ordered_json& header, const char* key,
               const std::string& context) {
  if (!header.contains(key) || !header.at(key).is_number()) {
    throw ModelIoError(context + ": header missing integer field '" +
                       std::string(key) + "'");
  }
  return header.at(key).get<int>();
}

}  // namespace

void save_dfc(const DfcModel& model, const std::filesystem::path& path) {
  ordered_json header;
  header["input_dim"] = model.input_dim();
  header["hidden_dim"] = DfcModel::kHiddenDim;
  header["classes"] = DfcModel::kNumClasses;
  header["seed"] = model.seed();
  header["epochs_run"] = model.training_log().epochs_run;
  header["final_loss"] = model.training_log().final_loss;
  write_artifact(path, "DFC", header, model.parameters(),
                 DfcModel::parameter_names());
}

DfcModel load_dfc(const std::filesystem::path& path) {
  const std::string context = "model artifact " + path.string();
  const Artifact artifact = read_artifact(path, "DFC");
  const int input_dim = header_int(artifact.header, "input_dim", context);
  const auto seed = artifact.header.value("seed", std::uint64_t{0});
  DfcModel model(input_dim, seed);
  assign_tensors(artifact, model.parameters(), DfcModel::parameter_names(),
                 context);
  model.training_log().epochs_run =
      artifact.header.value("epochs_run", 0);
  model.training_log().final_loss =
      artifact.header.value("final_loss", 0.0);
  return model;
}

void save_ccc(const CccModel& model, const std::filesystem::path& path) {
  ordered_json header;
  header["input_dim"] = model.input_dim();
  header["hidden_dim"] = model.arch().hidden_dim;
  header["attention_dim"] = model.arch().attention_dim;
  header["num_heads"] = model.arch().num_heads;
  header["max_sequence_length"] = model.arch().max_sequence_length;
  header["classes"] = CccModel::kNumClasses;
  header["seed"] = model.seed();
  header["epochs_run"] = model.training_log().epochs_run;
  header["final_loss"] = model.training_log().final_loss;
  write_artifact(path, "CCC", header, model.parameters(),
                 CccModel::parameter_names());
}

CccModel load_ccc(const std::filesystem::path& path) {
  const std::string context = "model artifact " + path.string();
  const Artifact artifact = read_artifact(path, "CCC");
  CccArch arch;
  arch.hidden_dim = header_int(artifact.header, "hidden_dim", context);
  arch.attention_dim = header_int(artifact.header, "attention_dim", context);
  arch.num_heads = header_int(artifact.header, "num_heads", context);
  arch.max_sequence_length =
      header_int(artifact.header, "max_sequence_length", context);
  const int input_dim = header_int(artifact.header, "input_dim", context);
  const auto seed = artifact.header.value("seed", std::uint64_t{0});
  CccModel model(input_dim, arch, seed);
  assign_tensors(artifact, model.parameters(), CccModel::parameter_names(),
                 context);
  model.training_log().epochs_run =
      artifact.header.value("epochs_run", 0);
  model.training_log().final_loss =
      artifact.header.value("final_loss", 0.0);
  return model;
}

}  // namespace consum
