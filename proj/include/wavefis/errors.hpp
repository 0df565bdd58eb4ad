#pragma once

#include <stdexcept>
#include <string>

namespace wavefis {

enum class Errc {
    non_finite,
    dimension_mismatch,
    too_short,
    window_too_long,
    window_not_dyadic,
    odd_length,
    too_short_for_filter,
    length_mismatch,
    depth_too_deep,
    inconsistent_bands,
    shape_mismatch,
    too_few_samples,
    empty_batch,
    singular_system,
    non_finite_gradient,
    no_valid_windows,
    invalid_config,
    empty_input,
    one_class_only,
    schema_version_mismatch,
    corrupt_file,
    csv_format,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::non_finite: return "NonFinite";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::too_short: return "TooShort";
        case Errc::window_too_long: return "WindowTooLong";
        case Errc::window_not_dyadic: return "WindowNotDyadic";
        case Errc::odd_length: return "OddLength";
        case Errc::too_short_for_filter: return "TooShortForFilter";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::depth_too_deep: return "DepthTooDeep";
        case Errc::inconsistent_bands: return "InconsistentBands";
        case Errc::shape_mismatch: return "ShapeMismatch";
        case Errc::too_few_samples: return "TooFewSamples";
        case Errc::empty_batch: return "EmptyBatch";
        case Errc::singular_system: return "SingularSystem";
        case Errc::non_finite_gradient: return "NonFiniteGradient";
        case Errc::no_valid_windows: return "NoValidWindows";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::empty_input: return "EmptyInput";
        case Errc::one_class_only: return "OneClassOnly";
        case Errc::schema_version_mismatch: return "SchemaVersionMismatch";
        case Errc::corrupt_file: return "CorruptFile";
        case Errc::csv_format: return "CsvFormat";
    }
    return "Unknown";
}

/// Library-wide exception type; `code` identifies the contract violation.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace wavefis
