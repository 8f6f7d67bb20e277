#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sdtf/fem.hpp"
#include "sdtf/mesh.hpp"

namespace sdtf {

using CsvValue = std::variant<std::int64_t, double, std::string>;
using CsvRow = std::vector<CsvValue>;

/// Formats a double with 17 significant digits so the text round-trips to
/// the same bits.
std::string format_double(double v);

/// Bit-stable CSV: fixed float formatting, '\n' line endings.
void export_csv(const std::string& path, const std::vector<std::string>& schema,
                const std::vector<CsvRow>& rows);

struct VtkPointField {
    std::string name;
    int components = 1;                 // 1 scalar, 2 written as 3d vectors
    std::vector<double> values;         // vertex-major, interleaved components
};

/// Legacy VTK ASCII (version 3.0) triangle mesh with region/tag cell data
/// and optional vertex point data.
void export_vtk(const std::string& path, const CoupledMesh& mesh,
                const std::vector<VtkPointField>& point_fields = {});

/// Vertex-sampled values of an FE function, zero outside the space's region.
VtkPointField vtk_field(const std::string& name, const FeFunction& f);

}  // namespace sdtf
