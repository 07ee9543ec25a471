#pragma once

#include <stdexcept>
#include <string>

namespace octdn {

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WriteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VolumeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RoiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AlignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FusionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EnsembleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace octdn
