#include "lrmf/archive.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace lrmf {

namespace {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
        return out;
    }
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json spec_to_json(const KernelSpec& spec) {
    return json{{"family", family_name(spec.family)}, {"h", spec.h}};
}

KernelSpec spec_from_json(const json& j, const KernelOptions& options) {
    KernelSpec spec{parse_family(j.at("family").get<std::string>()), j.at("h").get<std::vector<double>>(), options};
    spec.validate();
    return spec;
}

KernelOptions options_of(const Kernel& kernel) {
    if (const auto* spec = std::get_if<KernelSpec>(&kernel)) return spec->options;
    const auto& mix = std::get<MixtureKernel>(kernel);
    return mix.components.empty() ? KernelOptions{} : mix.components.front().spec.options;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t chunk = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        for (int s = 18; s >= 0; s -= 6) out.push_back(kAlphabet[(chunk >> s) & 0x3f]);
    }
    const std::size_t rest = bytes.size() - i;
    if (rest > 0) {
        std::uint32_t chunk = bytes[i] << 16;
        if (rest == 2) chunk |= bytes[i + 1] << 8;
        out.push_back(kAlphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kAlphabet[(chunk >> 12) & 0x3f]);
        out.push_back(rest == 2 ? kAlphabet[(chunk >> 6) & 0x3f] : '=');
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::array<int, 256> lookup{};
    lookup.fill(-1);
    for (std::size_t i = 0; i < kAlphabet.size(); ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
    if (text.size() % 4 != 0) data_error("base64 payload length is not a multiple of 4");

    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t chunk = 0;
        int pad = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char c = text[i + k];
            int value = 0;
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                ++pad;
            } else {
                value = lookup[static_cast<unsigned char>(c)];
                if (value < 0 || pad > 0) data_error("invalid base64 payload");
            }
            chunk = (chunk << 6) | static_cast<std::uint32_t>(value);
        }
        out.push_back(static_cast<std::uint8_t>(chunk >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(chunk >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(chunk));
    }
    return out;
}

json matrix_to_json(const Matrix& m) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(m.size()) * 8);
    for (Index k = 0; k < m.size(); ++k) {
        const std::uint64_t raw = to_little_endian(std::bit_cast<std::uint64_t>(m.data()[k]));
        std::memcpy(bytes.data() + 8 * k, &raw, 8);
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"layout", "column-major"}, {"dtype", "f64le"},
                {"data", base64_encode(bytes)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    if (rows < 0 || cols < 0) data_error("matrix blob has negative dimensions");
    if (j.contains("layout") && j.at("layout") != "column-major") data_error("unsupported matrix layout");
    if (j.contains("dtype") && j.at("dtype") != "f64le") data_error("unsupported matrix dtype");
    const auto bytes = base64_decode(j.at("data").get<std::string>());
    if (bytes.size() != static_cast<std::size_t>(rows * cols) * 8) data_error("matrix blob size does not match its shape");
    Matrix m(rows, cols);
    for (Index k = 0; k < m.size(); ++k) {
        std::uint64_t raw = 0;
        std::memcpy(&raw, bytes.data() + 8 * k, 8);
        m.data()[k] = std::bit_cast<double>(to_little_endian(raw));
    }
    return m;
}

json kernel_to_json(const Kernel& kernel) {
    const KernelOptions options = options_of(kernel);
    json j;
    if (const auto* spec = std::get_if<KernelSpec>(&kernel)) {
        j = {{"type", "single"}};
        j.update(spec_to_json(*spec));
    } else {
        j = {{"type", "mixture"}};
        json components = json::array();
        for (const auto& c : std::get<MixtureKernel>(kernel).components) {
            json entry = spec_to_json(c.spec);
            entry["weight"] = c.weight;
            components.push_back(std::move(entry));
        }
        j["components"] = std::move(components);
    }
    j["rq_literal"] = options.rq_literal;
    j["compact_wendland"] = options.compact_wendland;
    return j;
}

Kernel kernel_from_json(const json& j) {
    KernelOptions options;
    options.rq_literal = j.value("rq_literal", false);
    options.compact_wendland = j.value("compact_wendland", false);
    const auto type = j.at("type").get<std::string>();
    if (type == "single") return spec_from_json(j, options);
    if (type != "mixture") data_error("unknown kernel type '" + type + "'");
    MixtureKernel mix;
    for (const auto& c : j.at("components")) {
        mix.components.push_back(MixtureComponent{spec_from_json(c, options), c.at("weight").get<double>()});
    }
    mix.validate();
    return mix;
}

json report_to_json(const SelectionReport& report) {
    json families = json::array();
    for (auto f : report.families) families.push_back(family_name(f));
    json j{{"mode", report.mode == SelectionMode::Additive ? "additive" : "adaptive"}, {"families", families}};
    if (report.mode == SelectionMode::Additive) {
        j["weights"] = report.weights;
        j["objective_value"] = report.objective_value;
        j["evaluations"] = report.evaluations;
    } else {
        json eps = json::array();
        for (double e : report.per_kernel_epsilon) {
            eps.push_back(std::isfinite(e) ? json(e) : json("inf"));
        }
        j["per_kernel_epsilon"] = eps;
        j["chosen"] = report.chosen ? json(family_name(*report.chosen)) : json(nullptr);
        j["n_used"] = report.n_used;
    }
    return j;
}

json surrogate_to_json(const Surrogate& s) {
    json j{{"version", kArchiveVersion},
           {"kernel", kernel_to_json(s.kernel)},
           {"pivots", s.pivots},
           {"rcond", s.rcond}};
    j["matrices"] = json{{"sliced_gramian", matrix_to_json(s.sliced.entries)},
                         {"hf_snapshots", matrix_to_json(s.hf_snapshots)},
                         {"lf_pivot_columns", matrix_to_json(s.lf_pivot_columns)}};
    j["lf_row_scale"] = vector_to_json(s.lf_row_scale);
    j["hf_row_scale"] = vector_to_json(s.hf_row_scale);
    j["hf_labels"] = s.hf_labels;
    return j;
}

Surrogate surrogate_from_json(const json& j) {
    try {
        if (j.at("version").get<int>() != kArchiveVersion) data_error("unsupported surrogate archive version");
        Surrogate s;
        s.kernel = kernel_from_json(j.at("kernel"));
        s.pivots = j.at("pivots").get<std::vector<Index>>();
        s.rcond = j.at("rcond").get<double>();
        const auto& m = j.at("matrices");
        s.sliced.entries = matrix_from_json(m.at("sliced_gramian"));
        s.sliced.indices = s.pivots;
        s.hf_snapshots = matrix_from_json(m.at("hf_snapshots"));
        s.lf_pivot_columns = matrix_from_json(m.at("lf_pivot_columns"));
        s.lf_row_scale = vector_from_json(j.value("lf_row_scale", json::array()));
        s.hf_row_scale = vector_from_json(j.value("hf_row_scale", json::array()));
        s.hf_labels = j.value("hf_labels", std::vector<std::string>{});

        const auto n = static_cast<Index>(s.pivots.size());
        if (s.sliced.entries.rows() != n || s.sliced.entries.cols() != n || s.hf_snapshots.cols() != n ||
            s.lf_pivot_columns.cols() != n) {
            data_error("surrogate archive matrices disagree with the pivot count");
        }
        s.prepare();
        return s;
    } catch (const json::exception& e) {
        data_error(std::string("malformed surrogate archive: ") + e.what());
    }
}

void save_surrogate(const Surrogate& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) data_error("cannot write " + path.string());
    out << surrogate_to_json(s).dump(2) << '\n';
}

Surrogate load_surrogate(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) data_error("cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        data_error("cannot parse " + path.string() + ": " + e.what());
    }
    return surrogate_from_json(j);
}

}  // namespace lrmf
