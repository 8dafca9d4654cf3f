#pragma once

#include <stdexcept>
#include <string>

namespace emesh {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// geometry
struct DegenerateTriangle : Error { using Error::Error; };
struct InvalidEpsilon : Error { using Error::Error; };
struct OffPlanePoint : Error { using Error::Error; };

// mesh_io
struct ParseError : Error {
    int line;
    ParseError(int line_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};
struct IndexError : Error { using Error::Error; };
struct EmptyMesh : Error { using Error::Error; };
struct DegenerateCloud : Error { using Error::Error; };

// classifier
struct EmptyCloud : Error { using Error::Error; };
struct LabelError : Error { using Error::Error; };

// metrics
struct ShapeError : Error { using Error::Error; };

// config / io
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace emesh
