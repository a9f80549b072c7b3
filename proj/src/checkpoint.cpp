#include "cpinn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cpinn/errors.hpp"

namespace cpinn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'P', 'I', 'N', 'N', 'M', 'D', 'L'};

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) {
            throw IoError("checkpoint is truncated");
        }
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void expect_magic() {
        if (bytes_.size() < sizeof(kMagic) || std::memcmp(bytes_.data(), kMagic, sizeof(kMagic)) != 0) {
            throw IoError("not a model checkpoint");
        }
        pos_ = sizeof(kMagic);
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

void put_network(std::string& out, const Mlp& net) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
    for (int s : net.layer_sizes()) put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
    for (double p : net.parameters()) put<double>(out, p);
}

Mlp get_network(Reader& in) {
    const auto n_sizes = in.get<std::uint32_t>();
    if (n_sizes < 2 || n_sizes > 1024) throw IoError("checkpoint has an invalid layer count");
    std::vector<int> sizes;
    for (std::uint32_t i = 0; i < n_sizes; ++i) {
        const auto s = in.get<std::uint32_t>();
        if (s == 0 || s > (1u << 20)) throw IoError("checkpoint has an invalid layer size");
        sizes.push_back(static_cast<int>(s));
    }
    Mlp net(std::move(sizes));
    for (double& p : net.parameters()) p = in.get<double>();
    return net;
}

} // namespace

std::string serialize_model(const CompositeModel& model) {
    std::string out(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.outer().size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.inner().size()));
    for (const auto& net : model.outer()) put_network(out, net);
    for (const auto& in : model.inner()) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(in.component));
        put<std::uint32_t>(out, in.blend.kind == BlendKind::from_origin ? 0u : 1u);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(in.blend.axis));
        put<double>(out, in.blend.origin);
        put<double>(out, in.blend.delta);
        put_network(out, in.net);
    }
    return out;
}

CompositeModel deserialize_model(const std::string& bytes) {
    Reader in(bytes);
    in.expect_magic();
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto input_dim = in.get<std::uint32_t>();
    const auto n_outer = in.get<std::uint32_t>();
    const auto n_inner = in.get<std::uint32_t>();
    if (n_outer > 64 || n_inner > 64) throw IoError("checkpoint has an implausible network count");
    std::vector<Mlp> outer;
    for (std::uint32_t i = 0; i < n_outer; ++i) outer.push_back(get_network(in));
    std::vector<InnerNet> inner;
    for (std::uint32_t i = 0; i < n_inner; ++i) {
        InnerNet net;
        net.component = static_cast<int>(in.get<std::uint32_t>());
        const auto kind = in.get<std::uint32_t>();
        if (kind > 1) throw IoError("checkpoint has an unknown blend kind");
        net.blend.kind = kind == 0 ? BlendKind::from_origin : BlendKind::to_one;
        net.blend.axis = static_cast<int>(in.get<std::uint32_t>());
        net.blend.origin = in.get<double>();
        net.blend.delta = in.get<double>();
        net.net = get_network(in);
        inner.push_back(std::move(net));
    }
    if (!in.at_end()) throw IoError("checkpoint has trailing bytes");
    try {
        return CompositeModel(static_cast<int>(input_dim), std::move(outer), std::move(inner));
    } catch (const ConfigError& e) {
        throw IoError(std::string("checkpoint describes an invalid model: ") + e.what());
    }
}

void save_checkpoint(const CompositeModel& model, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    const std::string bytes = serialize_model(model);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("failed writing " + path.string());
}

CompositeModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace cpinn
