#pragma once

#include "lrmf/common.hpp"
#include "lrmf/kernels.hpp"
#include "lrmf/selection.hpp"
#include "lrmf/surrogate.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lrmf {

using json = nlohmann::ordered_json;

inline constexpr int kArchiveVersion = 1;

[[nodiscard]] std::string base64_encode(std::span<const std::uint8_t> bytes);
[[nodiscard]] std::vector<std::uint8_t> base64_decode(std::string_view text);

/// {"rows", "cols", "layout": "column-major", "dtype": "f64le", "data": base64}
[[nodiscard]] json matrix_to_json(const Matrix& m);
[[nodiscard]] Matrix matrix_from_json(const json& j);

[[nodiscard]] json kernel_to_json(const Kernel& kernel);
[[nodiscard]] Kernel kernel_from_json(const json& j);

[[nodiscard]] json report_to_json(const SelectionReport& report);

/// Everything evaluation needs: kernel, pivots, sliced Gramian, pivot LF columns, HF snapshots, row scales.
[[nodiscard]] json surrogate_to_json(const Surrogate& s);
[[nodiscard]] Surrogate surrogate_from_json(const json& j);

void save_surrogate(const Surrogate& s, const std::filesystem::path& path);
[[nodiscard]] Surrogate load_surrogate(const std::filesystem::path& path);

}  // namespace lrmf
