#include <cstring>
#include <fstream>
#include <sstream>

#include "dora/mesh.hpp"

namespace dora {

namespace {

std::uint32_t resolve_obj_index(long idx, std::size_t vertex_count, const std::string& path) {
    long resolved = idx > 0 ? idx - 1 : static_cast<long>(vertex_count) + idx;
    if (resolved < 0 || resolved >= static_cast<long>(vertex_count))
        throw MeshError(path + ": face index " + std::to_string(idx) + " out of range (" +
                        std::to_string(vertex_count) + " vertices)");
    return static_cast<std::uint32_t>(resolved);
}

void validate_mesh(const TriangleMesh& mesh, const std::string& path) {
    if (mesh.faces.empty()) throw MeshError(path + ": mesh has zero faces");
    for (const auto& f : mesh.faces) {
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw MeshError(path + ": face references the same vertex twice");
    }
}

}  // namespace

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open " + path);

    TriangleMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z)) throw MeshError(path + ": malformed vertex line");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::uint32_t> poly;
            std::string token;
            while (ls >> token) {
                // "i", "i/t", "i/t/n", "i//n" — only the vertex index matters
                std::size_t slash = token.find('/');
                std::string head = slash == std::string::npos ? token : token.substr(0, slash);
                long idx;
                try {
                    idx = std::stol(head);
                } catch (const std::exception&) {
                    throw MeshError(path + ": malformed face token '" + token + "'");
                }
                poly.push_back(resolve_obj_index(idx, mesh.vertices.size(), path));
            }
            if (poly.size() < 3) throw MeshError(path + ": face with fewer than 3 vertices");
            // fan-triangulate at the first vertex
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    validate_mesh(mesh, path);
    return mesh;
}

namespace {

struct PlyProperty {
    std::string type;        // scalar type, or list count type
    std::string value_type;  // for lists
    std::string name;
    bool is_list = false;
};

std::size_t scalar_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw MeshError("unknown PLY scalar type " + t);
}

double read_binary_scalar(std::istream& in, const std::string& t) {
    unsigned char buf[8];
    std::size_t n = scalar_size(t);
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (!in) throw MeshError("truncated PLY binary data");
    auto as = [&](auto value) {
        std::memcpy(&value, buf, sizeof(value));
        return static_cast<double>(value);
    };
    if (t == "char" || t == "int8") return as(std::int8_t{});
    if (t == "uchar" || t == "uint8") return as(std::uint8_t{});
    if (t == "short" || t == "int16") return as(std::int16_t{});
    if (t == "ushort" || t == "uint16") return as(std::uint16_t{});
    if (t == "int" || t == "int32") return as(std::int32_t{});
    if (t == "uint" || t == "uint32") return as(std::uint32_t{});
    if (t == "float" || t == "float32") return as(float{});
    return as(double{});
}

}  // namespace

TriangleMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshError("cannot open " + path);

    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw MeshError(path + ": not a PLY file");

    bool binary = false;
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;

    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt != "ascii")
                throw MeshError(path + ": unsupported PLY format " + fmt);
        } else if (tag == "element") {
            Element e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) throw MeshError(path + ": property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.type >> p.value_type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }

    TriangleMesh mesh;
    auto read_scalar = [&](const std::string& t) -> double {
        if (binary) return read_binary_scalar(in, t);
        double v;
        if (!(in >> v)) throw MeshError(path + ": truncated PLY ASCII data");
        return v;
    };

    for (const Element& e : elements) {
        for (std::size_t i = 0; i < e.count; ++i) {
            Vec3 pos;
            std::vector<std::uint32_t> poly;
            for (const PlyProperty& p : e.props) {
                if (p.is_list) {
                    auto n = static_cast<std::size_t>(read_scalar(p.type));
                    std::vector<double> values(n);
                    for (auto& v : values) v = read_scalar(p.value_type);
                    if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index"))
                        for (double v : values) poly.push_back(static_cast<std::uint32_t>(v));
                } else {
                    double v = read_scalar(p.type);
                    if (e.name == "vertex") {
                        if (p.name == "x") pos.x = v;
                        else if (p.name == "y") pos.y = v;
                        else if (p.name == "z") pos.z = v;
                    }
                }
            }
            if (e.name == "vertex") mesh.vertices.push_back(pos);
            if (e.name == "face" && !poly.empty()) {
                if (poly.size() < 3) throw MeshError(path + ": face with fewer than 3 vertices");
                for (std::uint32_t idx : poly)
                    if (idx >= mesh.vertices.size())
                        throw MeshError(path + ": face index out of range");
                for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                    mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    validate_mesh(mesh, path);
    return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
    auto dotpos = path.rfind('.');
    std::string ext = dotpos == std::string::npos ? "" : path.substr(dotpos + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == "obj") return load_obj(path);
    if (ext == "ply") return load_ply(path);
    throw MeshError("unsupported mesh format: " + path);
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open " + path + " for writing");
    out.precision(17);
    for (const Vec3& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    if (!out) throw MeshError("write failed: " + path);
}

}  // namespace dora
