// SPDX-License-Identifier: Apache-2.0
#include "scion/models/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "scion/io/format.hpp"

namespace scion {

namespace {

constexpr std::string_view kMagic = "scion-checkpoint";

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::vector<std::string> next(std::string_view expect_key = {}) {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of checkpoint");
    ++line_no_;
    std::vector<std::string> tokens;
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) fail("empty line");
    if (!expect_key.empty() && tokens[0] != expect_key) {
      fail("expected '" + std::string(expect_key) + "', found '" + tokens[0] + "'");
    }
    return tokens;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("checkpoint line " + std::to_string(line_no_) + ": " + msg);
  }

  void expect_count(const std::vector<std::string>& t, std::size_t n) const {
    if (t.size() != n) {
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(t.size()));
    }
  }

  std::size_t to_size(const std::string& s, std::string_view what) const {
    try {
      const long long v = parse_int(s, what);
      if (v < 0) fail(std::string(what) + " must be nonnegative");
      return static_cast<std::size_t>(v);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  double to_double(const std::string& s, std::string_view what) const {
    try {
      return parse_double(s, what);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  std::ostringstream out;
  out << kMagic << " v" << kCheckpointVersion << '\n';
  out << "step " << ckpt.step << '\n';
  out << "seed " << ckpt.seed << '\n';
  const auto& layers = ckpt.model.layers();
  out << "layers " << layers.size() << '\n';
  for (const auto& L : layers) {
    out << "layer " << L.d_in << ' ' << L.d_out << ' ' << activation_name(L.activation) << ' '
        << init_name(L.init) << ' ' << norm_kind_name(L.weight_norm.kind) << ' '
        << format_double(L.rho_scale) << ' '
        << (L.bias_norm ? norm_kind_name(L.bias_norm->kind) : std::string_view("none")) << ' '
        << format_double(L.bias_rho) << '\n';
  }
  const auto& params = ckpt.model.params();
  out << "tensors " << params.size() << '\n';
  for (const auto& m : params) {
    out << "tensor " << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      auto r = m.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) out << (j ? " " : "") << format_double(r[j]);
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

Checkpoint checkpoint_from_string(const std::string& text) {
  LineReader rd(text);
  auto head = rd.next(kMagic);
  rd.expect_count(head, 2);
  if (head[1] != "v" + std::to_string(kCheckpointVersion)) {
    rd.fail("unsupported checkpoint version '" + head[1] + "'");
  }
  Checkpoint ck;
  auto t = rd.next("step");
  rd.expect_count(t, 2);
  ck.step = rd.to_size(t[1], "step");
  t = rd.next("seed");
  rd.expect_count(t, 2);
  ck.seed = rd.to_size(t[1], "seed");
  t = rd.next("layers");
  rd.expect_count(t, 2);
  const std::size_t n_layers = rd.to_size(t[1], "layers");
  std::vector<LayerSpec> layers;
  for (std::size_t l = 0; l < n_layers; ++l) {
    t = rd.next("layer");
    rd.expect_count(t, 9);
    LayerSpec L;
    try {
      L.d_in = rd.to_size(t[1], "d_in");
      L.d_out = rd.to_size(t[2], "d_out");
      L.activation = parse_activation(t[3]);
      L.init = parse_init(t[4]);
      L.weight_norm = NormSpec::matrix(parse_norm_kind(t[5]), L.d_out, L.d_in);
      L.rho_scale = rd.to_double(t[6], "rho");
      if (t[7] != "none") L.bias_norm = NormSpec::vector(parse_norm_kind(t[7]), L.d_out);
      L.bias_rho = rd.to_double(t[8], "bias_rho");
    } catch (const std::invalid_argument& e) {
      rd.fail(e.what());
    }
    layers.push_back(L);
  }
  t = rd.next("tensors");
  rd.expect_count(t, 2);
  const std::size_t n_tensors = rd.to_size(t[1], "tensors");
  ParamList params;
  for (std::size_t p = 0; p < n_tensors; ++p) {
    t = rd.next("tensor");
    rd.expect_count(t, 3);
    const std::size_t rows = rd.to_size(t[1], "rows");
    const std::size_t cols = rd.to_size(t[2], "cols");
    if (rows == 0 || cols == 0) rd.fail("tensor dimensions must be positive");
    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      auto row = rd.next();
      rd.expect_count(row, cols);
      for (const auto& v : row) data.push_back(rd.to_double(v, "value"));
    }
    params.push_back(Matrix::from_data(rows, cols, std::move(data)));
  }
  rd.next("end");
  try {
    ck.model = MlpModel(std::move(layers), std::move(params));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("checkpoint is inconsistent: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << checkpoint_to_string(ckpt);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace scion
