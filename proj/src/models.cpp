#include "lgae/models.hpp"

#include "lgae/error.hpp"
#include "lgae/linalg.hpp"
#include "lgae/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace lgae {

bool is_variational(Variant v) { return v == Variant::LVGAE || v == Variant::VGAE; }

bool is_linear_encoder(Variant v) { return v == Variant::LGAE || v == Variant::LVGAE; }

std::string to_string(Variant v) {
    switch (v) {
    case Variant::LGAE: return "lgae";
    case Variant::LVGAE: return "lvgae";
    case Variant::GAE: return "gae";
    case Variant::VGAE: return "vgae";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "lgae") return Variant::LGAE;
    if (s == "lvgae") return Variant::LVGAE;
    if (s == "gae") return Variant::GAE;
    if (s == "vgae") return Variant::VGAE;
    throw ConfigError("unknown variant '" + s + "' (expected lgae|lvgae|gae|vgae)");
}

void ModelConfig::validate() const {
    if (input_dim == 0) throw ConfigError("model config: input_dim must be >= 1");
    if (hidden_dims.empty()) throw ConfigError("model config: hidden_dims must be non-empty");
    for (std::size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("model config: hidden dims must be >= 1");
    }
    if (!is_linear_encoder(variant) && hidden_dims.size() != k) {
        throw ConfigError("model config: GCN encoders need one layer per hop (hidden_dims length " +
                          std::to_string(hidden_dims.size()) + " != k " + std::to_string(k) + ")");
    }
}

std::vector<std::size_t> gcn_hidden_dims_for_k(std::size_t k) {
    if (k < 1 || k > 12) {
        throw ConfigError("gcn hidden progression: k must be in [1, 12], got " + std::to_string(k));
    }
    std::vector<std::size_t> dims(k);
    for (std::size_t i = 0; i < k; ++i) {
        dims[i] = static_cast<std::size_t>(16) << (k - 1 - i);
    }
    return dims;
}

bool ModelParams::has_biases() const { return is_linear_encoder(config.variant); }

ModelParams ModelParams::glorot(const ModelConfig& config) {
    config.validate();
    ModelParams p;
    p.config = config;
    const bool variational = is_variational(config.variant);
    const bool biased = is_linear_encoder(config.variant);
    const std::size_t layers = config.hidden_dims.size();

    Rng rng(config.seed);
    const auto glorot_fill = [&rng](std::size_t fan_in, std::size_t fan_out) {
        DenseMatrix w(fan_in, fan_out, 0.0);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& x : w.data) x = rng.next_uniform(-limit, limit);
        return w;
    };

    std::size_t in_dim = config.input_dim;
    const std::size_t shared = variational ? layers - 1 : layers;
    for (std::size_t i = 0; i < shared; ++i) {
        const std::size_t out_dim = config.hidden_dims[i];
        p.weights.push_back(glorot_fill(in_dim, out_dim));
        if (biased) p.biases.emplace_back(1, out_dim, 0.0);
        in_dim = out_dim;
    }
    if (variational) {
        const std::size_t latent = config.hidden_dims.back();
        p.w_mu = glorot_fill(in_dim, latent);
        if (biased) p.b_mu = DenseMatrix(1, latent, 0.0);
        p.w_log_sigma = glorot_fill(in_dim, latent);
        if (biased) p.b_log_sigma = DenseMatrix(1, latent, 0.0);
    }
    return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
    ModelParams p;
    p.config = other.config;
    for (const auto& w : other.weights) p.weights.emplace_back(w.rows, w.cols, 0.0);
    for (const auto& b : other.biases) p.biases.emplace_back(b.rows, b.cols, 0.0);
    p.w_mu = DenseMatrix(other.w_mu.rows, other.w_mu.cols, 0.0);
    p.w_log_sigma = DenseMatrix(other.w_log_sigma.rows, other.w_log_sigma.cols, 0.0);
    p.b_mu = DenseMatrix(other.b_mu.rows, other.b_mu.cols, 0.0);
    p.b_log_sigma = DenseMatrix(other.b_log_sigma.rows, other.b_log_sigma.cols, 0.0);
    return p;
}

namespace {

template <typename Params, typename MatPtr>
std::vector<std::pair<std::string, MatPtr>> collect_tensors(Params& p) {
    std::vector<std::pair<std::string, MatPtr>> out;
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        out.emplace_back("W" + std::to_string(i), &p.weights[i]);
        if (i < p.biases.size()) {
            out.emplace_back("b" + std::to_string(i), &p.biases[i]);
        }
    }
    if (p.w_mu.data.size() > 0) {
        out.emplace_back("W_mu", &p.w_mu);
        if (p.b_mu.data.size() > 0) out.emplace_back("b_mu", &p.b_mu);
        out.emplace_back("W_log_sigma", &p.w_log_sigma);
        if (p.b_log_sigma.data.size() > 0) out.emplace_back("b_log_sigma", &p.b_log_sigma);
    }
    return out;
}

} // namespace

std::vector<std::pair<std::string, DenseMatrix*>> ModelParams::tensors() {
    return collect_tensors<ModelParams, DenseMatrix*>(*this);
}

std::vector<std::pair<std::string, const DenseMatrix*>> ModelParams::tensors() const {
    return collect_tensors<const ModelParams, const DenseMatrix*>(*this);
}

std::size_t ModelParams::scalar_count() const {
    std::size_t total = 0;
    for (const auto& [name, m] : tensors()) total += m->data.size();
    return total;
}

DenseMatrix reparameterize(const DenseMatrix& mu, const DenseMatrix& log_sigma,
                           const DenseMatrix& noise) {
    if (!mu.same_shape(log_sigma) || !mu.same_shape(noise)) {
        throw ShapeError("reparameterize: mu, log_sigma and noise must share a shape");
    }
    DenseMatrix z(mu.rows, mu.cols, 0.0);
    for (std::size_t i = 0; i < mu.data.size(); ++i) {
        z.data[i] = mu.data[i] + std::exp(log_sigma.data[i]) * noise.data[i];
    }
    return z;
}

namespace {

void relu_inplace(DenseMatrix& m) {
    for (double& x : m.data) x = x > 0.0 ? x : 0.0;
}

void check_finite(const DenseMatrix& m, const char* what) {
    if (!m.all_finite()) {
        throw NumericError(std::string("encoder produced non-finite values in ") + what);
    }
}

LatentOutput finish_variational(DenseMatrix mu, DenseMatrix log_sigma, const DenseMatrix* noise) {
    check_finite(mu, "mu");
    check_finite(log_sigma, "log_sigma");
    LatentOutput out;
    if (noise != nullptr) {
        out.z = reparameterize(mu, log_sigma, *noise);
        check_finite(out.z, "z");
    } else {
        out.z = mu; // posterior-mean readout
    }
    out.mu = std::move(mu);
    out.log_sigma = std::move(log_sigma);
    return out;
}

} // namespace

LatentOutput encode_linear(const DenseMatrix& xbar, const ModelParams& params,
                           const DenseMatrix* noise) {
    const ModelConfig& cfg = params.config;
    if (xbar.cols != cfg.input_dim) {
        throw ShapeError("encode_linear: input has " + std::to_string(xbar.cols) +
                         " columns, config expects " + std::to_string(cfg.input_dim));
    }
    const bool variational = is_variational(cfg.variant);
    const std::size_t layers = cfg.hidden_dims.size();
    const std::size_t shared = variational ? layers - 1 : layers;

    DenseMatrix h;
    const DenseMatrix* cur = &xbar; // avoids copying the (possibly huge) input
    for (std::size_t i = 0; i < shared; ++i) {
        h = matmul(*cur, params.weights[i]);
        if (i < params.biases.size()) {
            add_row_vector(h, std::span<const double>(params.biases[i].data));
        }
        if (i + 1 < layers) relu_inplace(h); // final layer stays linear
        cur = &h;
    }

    if (!variational) {
        check_finite(h, "z");
        LatentOutput out;
        out.z = std::move(h);
        return out;
    }
    DenseMatrix mu = matmul(*cur, params.w_mu);
    DenseMatrix log_sigma = matmul(*cur, params.w_log_sigma);
    if (params.b_mu.data.size() > 0) {
        add_row_vector(mu, std::span<const double>(params.b_mu.data));
        add_row_vector(log_sigma, std::span<const double>(params.b_log_sigma.data));
    }
    return finish_variational(std::move(mu), std::move(log_sigma), noise);
}

LatentOutput encode_gcn(const DenseMatrix& x, const SparseMatrix& s, const ModelParams& params,
                        const DenseMatrix* noise) {
    const ModelConfig& cfg = params.config;
    if (x.cols != cfg.input_dim) {
        throw ShapeError("encode_gcn: input has " + std::to_string(x.cols) +
                         " columns, config expects " + std::to_string(cfg.input_dim));
    }
    if (s.n_rows != s.n_cols || s.n_rows != x.rows) {
        throw ShapeError("encode_gcn: operator must be square with one row per input row");
    }
    const bool variational = is_variational(cfg.variant);
    const std::size_t layers = cfg.hidden_dims.size();
    const std::size_t shared = variational ? layers - 1 : layers;

    DenseMatrix h;
    const DenseMatrix* cur = &x;
    for (std::size_t i = 0; i < shared; ++i) {
        h = spmm(s, matmul(*cur, params.weights[i]));
        if (i < params.biases.size()) {
            add_row_vector(h, std::span<const double>(params.biases[i].data));
        }
        if (i + 1 < layers) relu_inplace(h);
        cur = &h;
    }

    if (!variational) {
        check_finite(h, "z");
        LatentOutput out;
        out.z = std::move(h);
        return out;
    }
    DenseMatrix mu = spmm(s, matmul(*cur, params.w_mu));
    DenseMatrix log_sigma = spmm(s, matmul(*cur, params.w_log_sigma));
    if (params.b_mu.data.size() > 0) {
        add_row_vector(mu, std::span<const double>(params.b_mu.data));
        add_row_vector(log_sigma, std::span<const double>(params.b_log_sigma.data));
    }
    return finish_variational(std::move(mu), std::move(log_sigma), noise);
}

DenseMatrix decode_inner_product(const DenseMatrix& z) {
    DenseMatrix a_hat = matmul_a_bt(z, z);
    for (double& x : a_hat.data) {
        const double e = std::exp(-std::abs(x));
        x = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    }
    return a_hat;
}

ReconLossSpec make_recon_spec(const SparseMatrix& a_train) {
    if (a_train.n_rows != a_train.n_cols) {
        throw ShapeError("make_recon_spec: adjacency must be square");
    }
    const std::size_t n = a_train.n_rows;
    if (n == 0) throw DegenerateGraphError("make_recon_spec: empty graph");

    ReconLossSpec spec;
    SparseMatrix& t = spec.target;
    t.n_rows = n;
    t.n_cols = n;
    t.row_offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t extra = 1; // self-loop
        for (std::size_t p = a_train.row_offsets[i]; p < a_train.row_offsets[i + 1]; ++p) {
            if (a_train.col_indices[p] == i) extra = 0;
        }
        t.row_offsets[i + 1] =
            t.row_offsets[i] + (a_train.row_offsets[i + 1] - a_train.row_offsets[i]) + extra;
    }
    t.col_indices.resize(t.row_offsets.back());
    t.values.assign(t.row_offsets.back(), 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t out = t.row_offsets[i];
        bool placed = false;
        for (std::size_t p = a_train.row_offsets[i]; p < a_train.row_offsets[i + 1]; ++p) {
            const std::uint32_t j = a_train.col_indices[p];
            if (!placed && j >= i) {
                if (j > i) {
                    t.col_indices[out++] = static_cast<std::uint32_t>(i);
                }
                placed = true;
                if (j == i) {
                    t.col_indices[out++] = j;
                    continue;
                }
            }
            t.col_indices[out++] = j;
        }
        if (!placed) t.col_indices[out++] = static_cast<std::uint32_t>(i);
    }

    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    const double nnz = static_cast<double>(t.nnz());
    if (nnz == 0.0) throw DegenerateGraphError("reconstruction target has no positive pairs");
    if (n2 - nnz > 0.0) {
        spec.pos_weight = (n2 - nnz) / nnz;
        spec.norm = n2 / (2.0 * (n2 - nnz));
    } else {
        // Every pair is positive (tiny toys): plain mean BCE.
        spec.pos_weight = 1.0;
        spec.norm = 1.0;
    }
    return spec;
}

double reconstruction_loss(const DenseMatrix& z, const ReconLossSpec& spec, DenseMatrix* grad_z) {
    const std::size_t n = z.rows;
    if (spec.target.n_rows != n) {
        throw ShapeError("reconstruction_loss: latent rows must match target size");
    }
    const double scale = spec.norm / (static_cast<double>(n) * static_cast<double>(n));
    if (grad_z != nullptr) {
        *grad_z = DenseMatrix(n, z.cols, 0.0);
    }

    std::vector<double> row_loss(n, 0.0);
    const std::size_t d = z.cols;
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* zi = z.row(i);
        double* gi = grad_z != nullptr ? grad_z->row(i) : nullptr;
        std::size_t tp = spec.target.row_offsets[i];
        const std::size_t tend = spec.target.row_offsets[i + 1];
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double target = 0.0;
            if (tp < tend && spec.target.col_indices[tp] == j) {
                target = 1.0;
                ++tp;
            }
            const double* zj = z.row(j);
            double x = 0.0;
            for (std::size_t l = 0; l < d; ++l) x += zi[l] * zj[l];

            const double w = target == 1.0 ? spec.pos_weight : 1.0;
            double sig;
            double softplus; // log(1 + exp(-|x|))
            if (x >= 0.0) {
                const double e = std::exp(-x);
                softplus = std::log1p(e);
                sig = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(x);
                softplus = std::log1p(e);
                sig = e / (1.0 + e);
            }
            acc += w * ((x >= 0.0 ? x : 0.0) - x * target + softplus);

            if (gi != nullptr) {
                const double g2 = 2.0 * scale * w * (sig - target);
                for (std::size_t l = 0; l < d; ++l) gi[l] += g2 * zj[l];
            }
        }
        row_loss[i] = acc;
    }

    double total = 0.0;
    for (double r : row_loss) total += r;
    total *= scale;
    if (!std::isfinite(total)) {
        throw NumericError("reconstruction_loss: non-finite loss");
    }
    return total;
}

double reconstruction_loss(const DenseMatrix& z, const SparseMatrix& a_train) {
    return reconstruction_loss(z, make_recon_spec(a_train), nullptr);
}

double kl_divergence(const DenseMatrix& mu, const DenseMatrix& log_sigma) {
    if (!mu.same_shape(log_sigma)) {
        throw ShapeError("kl_divergence: mu and log_sigma must share a shape");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.data.size(); ++i) {
        const double m = mu.data[i];
        const double ls = log_sigma.data[i];
        acc += 1.0 + 2.0 * ls - m * m - std::exp(2.0 * ls);
    }
    return -acc / (2.0 * static_cast<double>(mu.rows));
}

void kl_divergence_backward(const DenseMatrix& mu, const DenseMatrix& log_sigma,
                            DenseMatrix& grad_mu, DenseMatrix& grad_log_sigma) {
    const double inv_n = 1.0 / static_cast<double>(mu.rows);
    for (std::size_t i = 0; i < mu.data.size(); ++i) {
        grad_mu.data[i] += mu.data[i] * inv_n;
        grad_log_sigma.data[i] += (std::exp(2.0 * log_sigma.data[i]) - 1.0) * inv_n;
    }
}

std::size_t param_count(const ModelConfig& config) {
    if (config.input_dim == 0) throw ConfigError("param_count: input_dim must be >= 1");
    const bool variational = is_variational(config.variant);
    const bool biased = is_linear_encoder(config.variant);

    std::vector<std::size_t> dims;
    if (is_linear_encoder(config.variant)) {
        if (config.hidden_dims.empty()) throw ConfigError("param_count: hidden_dims must be non-empty");
        dims = config.hidden_dims;
    } else {
        dims = config.hidden_dims.size() == config.k ? config.hidden_dims
                                                     : gcn_hidden_dims_for_k(config.k);
        if (config.k > 12) throw ConfigError("param_count: unsupported k > 12");
    }

    std::size_t total = 0;
    std::size_t in_dim = config.input_dim;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        std::size_t layer = in_dim * dims[i] + (biased ? dims[i] : 0);
        if (variational && i + 1 == dims.size()) layer *= 2; // (mu, log_sigma) pair
        total += layer;
        in_dim = dims[i];
    }
    return total;
}

// --- checkpoint io -----------------------------------------------------------

namespace {

constexpr char kParamMagic[8] = {'L', 'G', 'A', 'E', 'P', 'A', 'R', 'M'};
constexpr std::uint32_t kParamVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian and doubles are written verbatim");

void put_u32(std::ofstream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void save_params(const std::string& path, const ModelParams& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kParamMagic, sizeof(kParamMagic));
    put_u32(out, kParamVersion);
    put_u32(out, static_cast<std::uint32_t>(params.config.variant));
    put_u64(out, params.config.input_dim);
    put_u64(out, params.config.k);
    put_u64(out, params.config.seed);
    put_u32(out, static_cast<std::uint32_t>(params.config.hidden_dims.size()));
    for (std::size_t h : params.config.hidden_dims) put_u64(out, h);

    const auto tensors = params.tensors();
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u64(out, m->rows);
        put_u64(out, m->cols);
        out.write(reinterpret_cast<const char*>(m->data.data()),
                  static_cast<std::streamsize>(m->data.size() * sizeof(double)));
    }
    if (!out) throw IoError("short write to checkpoint: " + path);
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kParamMagic, sizeof(kParamMagic)) != 0) {
        throw IntegrityError(path + ": bad checkpoint magic");
    }
    if (get_u32(in) != kParamVersion) {
        throw IntegrityError(path + ": unsupported checkpoint version");
    }
    ModelConfig cfg;
    cfg.variant = static_cast<Variant>(get_u32(in));
    cfg.input_dim = get_u64(in);
    cfg.k = get_u64(in);
    cfg.seed = get_u64(in);
    cfg.hidden_dims.resize(get_u32(in));
    for (std::size_t& h : cfg.hidden_dims) h = get_u64(in);

    ModelParams params = ModelParams::zeros_like(ModelParams::glorot(cfg));
    params.config = cfg;
    const auto tensors = params.tensors();
    const std::uint32_t count = get_u32(in);
    if (count != tensors.size()) {
        throw IntegrityError(path + ": tensor count does not match config");
    }
    for (const auto& [name, m] : tensors) {
        std::string stored(get_u32(in), '\0');
        in.read(stored.data(), static_cast<std::streamsize>(stored.size()));
        if (stored != name) {
            throw IntegrityError(path + ": tensor '" + stored + "' where '" + name + "' expected");
        }
        const std::uint64_t rows = get_u64(in);
        const std::uint64_t cols = get_u64(in);
        if (rows != m->rows || cols != m->cols) {
            throw IntegrityError(path + ": tensor '" + name + "' has unexpected shape");
        }
        in.read(reinterpret_cast<char*>(m->data.data()),
                static_cast<std::streamsize>(m->data.size() * sizeof(double)));
    }
    if (!in) throw IntegrityError(path + ": truncated checkpoint");
    return params;
}

} // namespace lgae
