#include "fuzzyduo/model_io.hpp"

#include "fuzzyduo/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace fuzzyduo {

static_assert(std::endian::native == std::endian::little, "model files are written in host little-endian order");

namespace {

constexpr std::array<char, 8> kMagic{'F', 'Z', 'D', 'U', 'O', 'M', 'D', 'L'};
// Refuse absurd shapes from corrupt files before allocating.
constexpr std::uint32_t kMaxDim = 1u << 20;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <typename T>
    void scalar(T v)
    {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

    void u32(Index v) { scalar(static_cast<std::uint32_t>(v)); }

    template <typename Derived>
    void tensor(const Eigen::DenseBase<Derived>& t)
    {
        out_.write(reinterpret_cast<const char*>(t.derived().data()),
                   static_cast<std::streamsize>(t.size() * sizeof(double)));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <typename T>
    T scalar()
    {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_)
            throw ParseError("model file truncated");
        return v;
    }

    Index dim(const char* what)
    {
        const auto v = scalar<std::uint32_t>();
        if (v == 0 || v > kMaxDim)
            throw ParseError(std::string("model file has invalid ") + what + " " + std::to_string(v));
        return static_cast<Index>(v);
    }

    Matrix matrix(Index rows, Index cols)
    {
        Matrix m(rows, cols);
        read_into(m.data(), m.size());
        return m;
    }

    Vector vector(Index n)
    {
        Vector v(n);
        read_into(v.data(), n);
        return v;
    }

private:
    void read_into(double* dst, Index n)
    {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in_)
            throw ParseError("model file truncated");
    }

    std::istream& in_;
};

void write_filter(Writer& w, const FuzzyFilterParams& p)
{
    w.scalar<std::uint8_t>(p.bank.family == MfFamily::ModifiedLaplace ? 0 : 1);
    w.scalar<std::uint8_t>(p.bank.tie_widths ? 1 : 0);
    w.u32(p.num_rules());
    w.u32(p.dim());
    w.tensor(p.bank.centers);
    w.tensor(p.bank.width_raw);
    for (const auto& m : p.query)
        w.tensor(m);
    for (const auto& m : p.value)
        w.tensor(m);
}

FuzzyFilterParams read_filter(Reader& r)
{
    const auto family_tag = r.scalar<std::uint8_t>();
    if (family_tag > 1)
        throw ParseError("model file has unknown membership family tag " + std::to_string(family_tag));
    const auto tied = r.scalar<std::uint8_t>();
    const Index rules = r.dim("rule count");
    const Index dims = r.dim("filter dimension");

    FuzzyFilterParams p;
    p.bank.family = family_tag == 0 ? MfFamily::ModifiedLaplace : MfFamily::Gaussian;
    p.bank.tie_widths = tied != 0;
    p.bank.centers = r.matrix(rules, dims);
    p.bank.width_raw = r.matrix(rules, dims);
    for (Index i = 0; i < rules; ++i)
        p.query.push_back(r.matrix(dims, dims));
    for (Index i = 0; i < rules; ++i)
        p.value.push_back(r.matrix(dims, dims));
    return p;
}

} // namespace

void write_model(std::ostream& out, const ModelFile& model)
{
    model.params.validate();
    Writer w(out);
    out.write(kMagic.data(), kMagic.size());
    w.scalar(kModelFormatVersion);
    w.u32(model.params.num_classes());
    w.u32(model.params.channels());
    w.u32(model.params.timesteps());
    write_filter(w, model.params.spatial);
    write_filter(w, model.params.temporal);
    w.tensor(model.params.classifier_weights);
    w.tensor(model.params.classifier_bias);
    w.scalar<std::uint8_t>(model.standardization ? 1 : 0);
    if (model.standardization) {
        const auto& s = *model.standardization;
        if (s.mean.size() != model.params.channels() || s.sd.size() != model.params.channels())
            throw DimensionError("standardization stats do not match the model channel count");
        w.tensor(s.mean);
        w.tensor(s.sd);
    }
    if (!out)
        throw Error("failed writing model");
}

ModelFile read_model(std::istream& in)
{
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic)
        throw ParseError("not a fuzzyduo model file (bad magic)");
    Reader r(in);
    const auto version = r.scalar<std::uint32_t>();
    if (version != kModelFormatVersion)
        throw ParseError("unsupported model format_version " + std::to_string(version));

    const Index classes = r.dim("class count");
    const Index channels = r.dim("channel count");
    const Index timesteps = r.dim("timestep count");

    ModelFile model;
    auto& p = model.params;
    p.spatial = read_filter(r);
    p.temporal = read_filter(r);
    if (p.spatial.dim() != channels || p.temporal.dim() != timesteps)
        throw ParseError("model file filter dimensions disagree with the header");
    p.classifier_weights = r.matrix(classes, p.feature_width());
    p.classifier_bias = r.vector(classes);
    if (r.scalar<std::uint8_t>() != 0) {
        ChannelStats s;
        s.mean = r.vector(channels);
        s.sd = r.vector(channels);
        model.standardization = std::move(s);
    }
    try {
        p.validate();
    } catch (const Error& e) {
        throw ParseError(std::string("model file is inconsistent: ") + e.what());
    }
    return model;
}

void save_model(const std::filesystem::path& path, const ModelFile& model)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    write_model(out, model);
}

ModelFile load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open model file " + path.string());
    try {
        return read_model(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace fuzzyduo
