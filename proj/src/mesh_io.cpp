#include "marisim/scene.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace marisim {

using nlohmann::json;

namespace {

std::string readTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- OBJ

struct ObjFace {
  std::array<long, 3> v;
  std::size_t line;
};

struct ObjGroup {
  std::string name;
  std::vector<ObjFace> faces;
};

long parseObjIndex(const std::string& token, long vertex_count, std::size_t line) {
  const std::string head = token.substr(0, token.find('/'));
  long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
    throw LoadError("OBJ line " + std::to_string(line) + ": bad face index '" + token + "'");
  }
  return idx > 0 ? idx - 1 : vertex_count + idx;
}

} // namespace

std::vector<TriangleMesh> readObjText(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<ObjGroup> groups(1);
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::array<std::string, 3> tok;
      if (!(ls >> tok[0] >> tok[1] >> tok[2])) {
        throw LoadError("OBJ line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
      }
      Vec3 p;
      for (int i = 0; i < 3; ++i) {
        char* end = nullptr;
        p[i] = std::strtod(tok[i].c_str(), &end);
        if (end == tok[i].c_str() || *end != '\0') {
          throw LoadError("OBJ line " + std::to_string(line_no) + ": bad coordinate '" + tok[i] + "'");
        }
      }
      if (!p.allFinite()) {
        throw LoadError("OBJ line " + std::to_string(line_no) + ": vertex " + std::to_string(vertices.size()) +
                        " is not finite");
      }
      vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<long> poly;
      std::string tok;
      while (ls >> tok) poly.push_back(parseObjIndex(tok, static_cast<long>(vertices.size()), line_no));
      if (poly.size() < 3) throw LoadError("OBJ line " + std::to_string(line_no) + ": face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        groups.back().faces.push_back({{poly[0], poly[k], poly[k + 1]}, line_no});
      }
    } else if (tag == "o" || tag == "g") {
      std::string name;
      std::getline(ls >> std::ws, name);
      if (groups.back().faces.empty()) {
        groups.back().name = name;
      } else {
        groups.push_back({name, {}});
      }
    }
  }

  std::vector<TriangleMesh> meshes;
  std::size_t triangle_id = 0;
  for (const ObjGroup& group : groups) {
    if (group.faces.empty()) continue;
    TriangleMesh mesh;
    mesh.name = group.name;
    mesh.object_id = static_cast<int>(meshes.size());
    std::unordered_map<long, std::uint32_t> local;
    for (const ObjFace& face : group.faces) {
      std::array<std::uint32_t, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        const long g = face.v[k];
        if (g < 0 || g >= static_cast<long>(vertices.size())) {
          throw LoadError("OBJ line " + std::to_string(face.line) + ": triangle " + std::to_string(triangle_id) +
                          " references vertex " + std::to_string(g) + " but the file has " +
                          std::to_string(vertices.size()) + " vertices");
        }
        auto [it, inserted] = local.try_emplace(g, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(vertices[g]);
        tri[k] = it->second;
      }
      mesh.triangles.push_back(tri);
      ++triangle_id;
    }
    meshes.push_back(std::move(mesh));
  }
  if (meshes.empty()) throw LoadError("OBJ contains no faces");
  return meshes;
}

std::vector<TriangleMesh> readObj(const std::filesystem::path& path) {
  try {
    return readObjText(readTextFile(path));
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- glTF binary

namespace {

constexpr std::uint32_t kGlbMagic = 0x46546C67;  // "glTF"
constexpr std::uint32_t kChunkJson = 0x4E4F534A;
constexpr std::uint32_t kChunkBin = 0x004E4942;

std::uint32_t readU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

class GltfReader {
 public:
  GltfReader(json doc, std::vector<std::uint8_t> bin) : doc_(std::move(doc)), bin_(std::move(bin)) {}

  std::vector<TriangleMesh> meshes() {
    std::vector<TriangleMesh> out;
    const auto& nodes = doc_.value("nodes", json::array());
    if (doc_.contains("scenes") && !doc_["scenes"].empty()) {
      const std::size_t scene_index = doc_.value("scene", 0);
      const auto& scene = doc_["scenes"].at(scene_index);
      for (const auto& root : scene.value("nodes", json::array())) {
        visit(nodes, root.get<std::size_t>(), Eigen::Matrix4d::Identity(), out, 0);
      }
    } else {
      const auto& mesh_list = doc_.value("meshes", json::array());
      for (std::size_t m = 0; m < mesh_list.size(); ++m) {
        out.push_back(buildMesh(m, Eigen::Matrix4d::Identity(), static_cast<int>(out.size())));
      }
    }
    if (out.empty()) throw LoadError("glTF contains no meshes");
    return out;
  }

 private:
  static Eigen::Matrix4d localTransform(const json& node) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    if (node.contains("matrix")) {
      const auto& a = node["matrix"];
      for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) m(r, c) = a.at(c * 4 + r).get<double>();
      return m;
    }
    Eigen::Affine3d t = Eigen::Affine3d::Identity();
    if (node.contains("translation")) {
      const auto& v = node["translation"];
      t.translate(Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>()));
    }
    if (node.contains("rotation")) {
      const auto& q = node["rotation"];  // x, y, z, w
      t.rotate(Quat(q[3].get<double>(), q[0].get<double>(), q[1].get<double>(), q[2].get<double>()).normalized());
    }
    if (node.contains("scale")) {
      const auto& s = node["scale"];
      t.scale(Vec3(s[0].get<double>(), s[1].get<double>(), s[2].get<double>()));
    }
    return t.matrix();
  }

  void visit(const json& nodes, std::size_t index, const Eigen::Matrix4d& parent, std::vector<TriangleMesh>& out,
             int level) {
    if (level > 64) throw LoadError("glTF node hierarchy too deep (cycle?)");
    const auto& node = nodes.at(index);
    const Eigen::Matrix4d world = parent * localTransform(node);
    if (node.contains("mesh")) {
      out.push_back(buildMesh(node["mesh"].get<std::size_t>(), world, static_cast<int>(out.size())));
      if (node.contains("name")) out.back().name = node["name"].get<std::string>();
    }
    for (const auto& child : node.value("children", json::array())) {
      visit(nodes, child.get<std::size_t>(), world, out, level + 1);
    }
  }

  // Returns a pointer to element 0 of the accessor and its stride in bytes.
  std::pair<const std::uint8_t*, std::size_t> accessorData(const json& accessor, std::size_t element_size) const {
    if (accessor.contains("sparse")) throw LoadError("sparse glTF accessors are not supported");
    const auto& view = doc_.at("bufferViews").at(accessor.at("bufferView").get<std::size_t>());
    if (view.value("buffer", 0) != 0) throw LoadError("glTF bufferView must reference the GLB binary chunk");
    const std::size_t offset = view.value("byteOffset", std::size_t{0}) + accessor.value("byteOffset", std::size_t{0});
    const std::size_t stride = view.value("byteStride", element_size);
    const std::size_t count = accessor.at("count").get<std::size_t>();
    const std::size_t view_end = view.value("byteOffset", std::size_t{0}) + view.at("byteLength").get<std::size_t>();
    if (count > 0 && (offset + stride * (count - 1) + element_size > view_end || view_end > bin_.size())) {
      throw LoadError("glTF accessor exceeds its buffer");
    }
    return {bin_.data() + offset, stride};
  }

  TriangleMesh buildMesh(std::size_t mesh_index, const Eigen::Matrix4d& transform, int object_id) const {
    const auto& mesh = doc_.at("meshes").at(mesh_index);
    TriangleMesh out;
    out.object_id = object_id;
    out.name = mesh.value("name", "");
    const auto& accessors = doc_.at("accessors");
    std::size_t primitive_index = 0;
    for (const auto& prim : mesh.at("primitives")) {
      const std::string where = "mesh " + std::to_string(mesh_index) + " primitive " + std::to_string(primitive_index++);
      if (prim.value("mode", 4) != 4) throw LoadError(where + ": only triangle-list primitives are supported");
      const auto& pos = accessors.at(prim.at("attributes").at("POSITION").get<std::size_t>());
      if (pos.at("componentType").get<int>() != 5126 || pos.at("type").get<std::string>() != "VEC3") {
        throw LoadError(where + ": POSITION must be float VEC3");
      }
      const auto base = static_cast<std::uint32_t>(out.vertices.size());
      const std::size_t vcount = pos.at("count").get<std::size_t>();
      auto [pdata, pstride] = accessorData(pos, 12);
      for (std::size_t i = 0; i < vcount; ++i) {
        float xyz[3];
        std::memcpy(xyz, pdata + i * pstride, 12);
        const Eigen::Vector4d p = transform * Eigen::Vector4d(xyz[0], xyz[1], xyz[2], 1.0);
        const Vec3 v = p.head<3>();
        if (!v.allFinite()) throw LoadError(where + ": vertex " + std::to_string(i) + " is not finite");
        out.vertices.push_back(v);
      }

      std::vector<std::uint32_t> indices;
      if (prim.contains("indices")) {
        const auto& acc = accessors.at(prim["indices"].get<std::size_t>());
        const int type = acc.at("componentType").get<int>();
        const std::size_t size = type == 5121 ? 1 : type == 5123 ? 2 : type == 5125 ? 4 : 0;
        if (size == 0) throw LoadError(where + ": unsupported index component type " + std::to_string(type));
        const std::size_t count = acc.at("count").get<std::size_t>();
        auto [idata, istride] = accessorData(acc, size);
        indices.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
          const std::uint8_t* p = idata + i * istride;
          if (size == 1) indices[i] = p[0];
          else if (size == 2) indices[i] = static_cast<std::uint32_t>(p[0] | (p[1] << 8));
          else indices[i] = readU32(p);
        }
      } else {
        indices.resize(vcount);
        for (std::size_t i = 0; i < vcount; ++i) indices[i] = static_cast<std::uint32_t>(i);
      }
      if (indices.size() % 3 != 0) throw LoadError(where + ": index count is not a multiple of 3");
      for (std::size_t t = 0; t < indices.size() / 3; ++t) {
        std::array<std::uint32_t, 3> tri{};
        for (int k = 0; k < 3; ++k) {
          const std::uint32_t idx = indices[3 * t + k];
          if (idx >= vcount) {
            throw LoadError(where + ": triangle " + std::to_string(t) + " references vertex " + std::to_string(idx) +
                            " but the primitive has " + std::to_string(vcount) + " vertices");
          }
          tri[k] = base + idx;
        }
        out.triangles.push_back(tri);
      }
    }
    return out;
  }

  json doc_;
  std::vector<std::uint8_t> bin_;
};

} // namespace

std::vector<TriangleMesh> readGlbBytes(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 20 || readU32(bytes.data()) != kGlbMagic) throw LoadError("not a binary glTF file");
  if (readU32(bytes.data() + 4) != 2) throw LoadError("unsupported glTF version");
  const std::size_t total = std::min<std::size_t>(readU32(bytes.data() + 8), bytes.size());
  std::size_t pos = 12;
  json doc;
  bool have_json = false;
  std::vector<std::uint8_t> bin;
  while (pos + 8 <= total) {
    const std::uint32_t length = readU32(bytes.data() + pos);
    const std::uint32_t type = readU32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + length > total) throw LoadError("truncated glTF chunk");
    if (type == kChunkJson) {
      try {
        doc = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                          bytes.begin() + static_cast<std::ptrdiff_t>(pos + length));
      } catch (const json::exception& e) {
        throw LoadError(std::string("glTF JSON chunk: ") + e.what());
      }
      have_json = true;
    } else if (type == kChunkBin && bin.empty()) {
      bin.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                 bytes.begin() + static_cast<std::ptrdiff_t>(pos + length));
    }
    pos += (length + 3) & ~std::size_t{3};
  }
  if (!have_json) throw LoadError("glTF file has no JSON chunk");
  try {
    return GltfReader(std::move(doc), std::move(bin)).meshes();
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed glTF: ") + e.what());
  }
}

std::vector<TriangleMesh> readGlb(const std::filesystem::path& path) {
  const std::string data = readTextFile(path);
  try {
    return readGlbBytes(std::vector<std::uint8_t>(data.begin(), data.end()));
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

} // namespace marisim
