#include "sdtf/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sdtf {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void export_csv(const std::string& path, const std::vector<std::string>& schema,
                const std::vector<CsvRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export_csv: cannot open " + path);
    for (std::size_t i = 0; i < schema.size(); ++i) {
        out << (i ? "," : "") << schema[i];
    }
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != schema.size()) {
            throw std::invalid_argument("export_csv: row width does not match schema");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            if (const auto* d = std::get_if<double>(&row[i])) {
                out << format_double(*d);
            } else if (const auto* n = std::get_if<std::int64_t>(&row[i])) {
                out << *n;
            } else {
                out << std::get<std::string>(row[i]);
            }
        }
        out << "\n";
    }
}

void export_vtk(const std::string& path, const CoupledMesh& mesh,
                const std::vector<VtkPointField>& point_fields) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export_vtk: cannot open " + path);
    out << "# vtk DataFile Version 3.0\n";
    out << "sdtf coupled mesh\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& v : mesh.vertices) {
        out << format_double(v.x) << " " << format_double(v.y) << " 0\n";
    }

    // Triangles plus tagged boundary/interface edges as line cells.
    const std::size_t n_edges = mesh.boundary_edges.size() + mesh.interface_edges.size();
    const std::size_t n_cells = mesh.triangles.size() + n_edges;
    out << "CELLS " << n_cells << " " << 4 * mesh.triangles.size() + 3 * n_edges << "\n";
    for (const auto& t : mesh.triangles) {
        out << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
    }
    for (const auto& e : mesh.boundary_edges) out << "2 " << e.v[0] << " " << e.v[1] << "\n";
    for (const auto& e : mesh.interface_edges) out << "2 " << e.v[0] << " " << e.v[1] << "\n";
    out << "CELL_TYPES " << n_cells << "\n";
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
    for (std::size_t i = 0; i < n_edges; ++i) out << "3\n";

    out << "CELL_DATA " << n_cells << "\n";
    out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
    for (const auto& t : mesh.triangles) out << (t.region == Region::fluid ? 0 : 1) << "\n";
    for (std::size_t i = 0; i < n_edges; ++i) out << "-1\n";
    out << "SCALARS tag int 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out << "-1\n";
    for (const auto& e : mesh.boundary_edges) out << static_cast<int>(e.tag) << "\n";
    for (std::size_t i = 0; i < mesh.interface_edges.size(); ++i) {
        out << static_cast<int>(BoundaryTag::interface) << "\n";
    }

    if (!point_fields.empty()) {
        out << "POINT_DATA " << mesh.vertices.size() << "\n";
        for (const auto& f : point_fields) {
            if (f.values.size() != mesh.vertices.size() * static_cast<std::size_t>(f.components)) {
                throw std::invalid_argument("export_vtk: field size mismatch for " + f.name);
            }
            if (f.components == 1) {
                out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
                for (double v : f.values) out << format_double(v) << "\n";
            } else {
                out << "VECTORS " << f.name << " double\n";
                for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
                    out << format_double(f.values[2 * i]) << " " << format_double(f.values[2 * i + 1])
                        << " 0\n";
                }
            }
        }
    }
}

VtkPointField vtk_field(const std::string& name, const FeFunction& f) {
    const FiniteElementSpace& space = *f.space;
    const CoupledMesh& mesh = space.mesh();
    VtkPointField out{name, space.components(),
                      std::vector<double>(mesh.vertices.size() *
                                              static_cast<std::size_t>(space.components()),
                                          0.0)};
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const std::size_t s = space.vertex_scalar_dof(v);
        if (s == FiniteElementSpace::npos) continue;
        for (int c = 0; c < space.components(); ++c) {
            out.values[v * static_cast<std::size_t>(space.components()) +
                       static_cast<std::size_t>(c)] =
                f.coeffs[static_cast<Eigen::Index>(space.dof_index(s, c))];
        }
    }
    return out;
}

}  // namespace sdtf
