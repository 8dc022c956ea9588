#include "mbgan/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mbgan/errors.hpp"

namespace mbgan {
namespace {

constexpr char kMagic[5] = {'M', 'B', 'G', 'N', '1'};
constexpr std::uint64_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open for writing: " + path);
    }
    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), std::streamsize(n));
        if (!out_) throw IoError("write failed");
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void tensor(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        for (double v : m.values()) f64(v);
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open for reading: " + path);
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    void bytes(void* p, std::size_t n) {
        if (pos_ + n > buf_.size()) throw CheckpointCorrupt("checkpoint truncated");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    // Reads one tensor and checks it against the expected shape.
    Matrix tensor(std::size_t rows, std::size_t cols, const std::string& name) {
        const std::uint64_t r = u64(), c = u64();
        if (r != rows || c != cols)
            throw ShapeMismatch("checkpoint tensor " + name + ": expected " +
                                std::to_string(rows) + "x" + std::to_string(cols) + ", found " +
                                std::to_string(r) + "x" + std::to_string(c));
        Matrix m(rows, cols);
        for (double& v : m.values()) v = f64();
        return m;
    }
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

std::uint64_t head_code(HeadMode m) { return m == HeadMode::Logit ? 0 : 1; }

std::uint64_t alpha_mode_code(AlphaSchedule::Mode m) {
    return m == AlphaSchedule::Mode::Static ? 0 : 1;
}

} // namespace

void save_checkpoint(const TrainerState& st, const std::string& path) {
    Writer w(path);
    w.bytes(kMagic, 5);
    w.u64(kVersion);
    w.u64(std::uint64_t(st.iteration));
    w.u64(st.cfg.k);
    w.u64(head_code(st.cfg.head));
    w.u64(alpha_mode_code(st.alpha.mode));
    w.u64(std::uint64_t(st.alpha.fn));
    w.f64(st.alpha.static_value);
    w.f64(st.alpha.beta);
    w.f64(st.alpha.beta_floor);
    const bool learned = st.alpha.mode == AlphaSchedule::Mode::Learned;
    w.u64(learned ? std::uint64_t(st.alpha.adam.step_count) : 0);
    w.f64(learned ? st.alpha.adam.m[0](0, 0) : 0.0);
    w.f64(learned ? st.alpha.adam.v[0](0, 0) : 0.0);
    const auto& rs = st.rng.state();
    for (std::uint64_t word : rs.s) w.u64(word);
    w.u64(rs.has_cached_normal ? 1 : 0);
    w.f64(rs.cached_normal);
    w.u64(std::uint64_t(st.g_adam.step_count));
    for (const auto& da : st.d_adam) w.u64(std::uint64_t(da.step_count));

    std::uint64_t tensor_count = st.g.tensor_count() * 3; // params + adam m + adam v
    for (const auto& dk : st.d) tensor_count += dk.tensor_count() * 3;
    w.u64(tensor_count);

    for (std::size_t t = 0; t < st.g.tensor_count(); ++t) w.tensor(st.g.tensor(t));
    for (const auto& dk : st.d)
        for (std::size_t t = 0; t < dk.tensor_count(); ++t) w.tensor(dk.tensor(t));
    for (const auto& m : st.g_adam.m) w.tensor(m);
    for (const auto& v : st.g_adam.v) w.tensor(v);
    for (const auto& da : st.d_adam) {
        for (const auto& m : da.m) w.tensor(m);
        for (const auto& v : da.v) w.tensor(v);
    }
}

TrainerState load_checkpoint(const std::string& path, const TrainConfig& cfg) {
    cfg.validate();
    Reader r(path);
    char magic[5];
    r.bytes(magic, 5);
    if (std::memcmp(magic, kMagic, 5) != 0)
        throw CheckpointCorrupt("bad magic (not an MBGN1 checkpoint)");
    if (r.u64() != kVersion) throw CheckpointCorrupt("unsupported checkpoint version");

    TrainerState st = TrainerState::init(cfg); // shapes + defaults; values overwritten below
    st.iteration = std::int64_t(r.u64());

    const std::uint64_t k = r.u64();
    if (k != cfg.k)
        throw ShapeMismatch("checkpoint discriminator count " + std::to_string(k) +
                            " vs config k = " + std::to_string(cfg.k));
    if (r.u64() != head_code(cfg.head))
        throw ConfigInvalid("head: config disagrees with checkpoint");
    if (r.u64() != alpha_mode_code(cfg.alpha_mode))
        throw ConfigInvalid("alpha.mode: config disagrees with checkpoint");
    const std::uint64_t fn = r.u64();
    if (cfg.alpha_mode == AlphaSchedule::Mode::Learned && fn != std::uint64_t(cfg.alpha_fn))
        throw ConfigInvalid("alpha.fn: config disagrees with checkpoint");
    st.alpha.static_value = r.f64();
    st.alpha.beta = r.f64();
    st.alpha.beta_floor = r.f64();
    const std::uint64_t beta_step = r.u64();
    const double beta_m = r.f64();
    const double beta_v = r.f64();
    if (st.alpha.mode == AlphaSchedule::Mode::Learned) {
        st.alpha.adam.step_count = std::int64_t(beta_step);
        st.alpha.adam.m[0](0, 0) = beta_m;
        st.alpha.adam.v[0](0, 0) = beta_v;
    }

    Rng::State rs;
    for (auto& word : rs.s) word = r.u64();
    rs.has_cached_normal = r.u64() != 0;
    rs.cached_normal = r.f64();
    st.rng.restore(rs);

    st.g_adam.step_count = std::int64_t(r.u64());
    for (auto& da : st.d_adam) da.step_count = std::int64_t(r.u64());

    std::uint64_t expected_tensors = st.g.tensor_count() * 3;
    for (const auto& dk : st.d) expected_tensors += dk.tensor_count() * 3;
    if (r.u64() != expected_tensors) throw CheckpointCorrupt("unexpected tensor count");

    auto tensor_name = [](const std::string& owner, std::size_t t) {
        return owner + ".layer" + std::to_string(t / 2) + (t % 2 == 0 ? ".w" : ".b");
    };
    for (std::size_t t = 0; t < st.g.tensor_count(); ++t) {
        Matrix& dst = st.g.tensor(t);
        dst = r.tensor(dst.rows(), dst.cols(), tensor_name("G", t));
    }
    for (std::size_t kk = 0; kk < st.d.size(); ++kk)
        for (std::size_t t = 0; t < st.d[kk].tensor_count(); ++t) {
            Matrix& dst = st.d[kk].tensor(t);
            dst = r.tensor(dst.rows(), dst.cols(), tensor_name("D" + std::to_string(kk), t));
        }
    for (std::size_t t = 0; t < st.g_adam.m.size(); ++t)
        st.g_adam.m[t] = r.tensor(st.g_adam.m[t].rows(), st.g_adam.m[t].cols(),
                                  "G.adam.m[" + std::to_string(t) + "]");
    for (std::size_t t = 0; t < st.g_adam.v.size(); ++t)
        st.g_adam.v[t] = r.tensor(st.g_adam.v[t].rows(), st.g_adam.v[t].cols(),
                                  "G.adam.v[" + std::to_string(t) + "]");
    for (std::size_t kk = 0; kk < st.d_adam.size(); ++kk) {
        auto& da = st.d_adam[kk];
        const std::string who = "D" + std::to_string(kk) + ".adam";
        for (std::size_t t = 0; t < da.m.size(); ++t)
            da.m[t] = r.tensor(da.m[t].rows(), da.m[t].cols(),
                               who + ".m[" + std::to_string(t) + "]");
        for (std::size_t t = 0; t < da.v.size(); ++t)
            da.v[t] = r.tensor(da.v[t].rows(), da.v[t].cols(),
                               who + ".v[" + std::to_string(t) + "]");
    }

    if (!r.exhausted()) throw CheckpointCorrupt("trailing bytes after checkpoint payload");
    return st;
}

} // namespace mbgan
