// SPDX-License-Identifier: Apache-2.0

#include "bqe/ply.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bqe {

namespace {

enum class Scalar { Char, UChar, Short, UShort, Int, UInt, Float, Double };

struct Property {
  std::string name;
  Scalar type;
};

size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::Char:
    case Scalar::UChar: return 1;
    case Scalar::Short:
    case Scalar::UShort: return 2;
    case Scalar::Int:
    case Scalar::UInt:
    case Scalar::Float: return 4;
    case Scalar::Double: return 8;
  }
  return 0;
}

Scalar parse_scalar(const std::string& word, const std::string& context) {
  if (word == "char" || word == "int8") return Scalar::Char;
  if (word == "uchar" || word == "uint8") return Scalar::UChar;
  if (word == "short" || word == "int16") return Scalar::Short;
  if (word == "ushort" || word == "uint16") return Scalar::UShort;
  if (word == "int" || word == "int32") return Scalar::Int;
  if (word == "uint" || word == "uint32") return Scalar::UInt;
  if (word == "float" || word == "float32") return Scalar::Float;
  if (word == "double" || word == "float64") return Scalar::Double;
  throw std::runtime_error("malformed-header: unsupported property type '" + word + "' in " + context);
}

double read_binary_scalar(std::istream& in, Scalar type) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(scalar_size(type)));
  if (!in) throw std::runtime_error("malformed-header: truncated binary vertex data");
  switch (type) {
    case Scalar::Char: return static_cast<double>(static_cast<int8_t>(buf[0]));
    case Scalar::UChar: return static_cast<double>(buf[0]);
    case Scalar::Short: {
      int16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case Scalar::UShort: {
      uint16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case Scalar::Int: {
      int32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case Scalar::UInt: {
      uint32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case Scalar::Float: {
      float v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case Scalar::Double: {
      double v;
      std::memcpy(&v, buf, 8);
      return v;
    }
  }
  return 0.0;
}

}  // namespace

int round_to_u8(double v) {
  double r = std::round(v);  // half away from zero
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<int>(r);
}

PointCloudFrame load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_ply: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("malformed-header: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw std::runtime_error("malformed-header: missing 'ply' magic");

  bool binary = false;
  bool format_seen = false;
  long vertex_count = -1;
  std::vector<Property> props;
  bool in_vertex_element = false;
  bool vertex_element_seen = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        throw std::runtime_error("malformed-header: unsupported format '" + fmt + "'");
      format_seen = true;
    } else if (word == "element") {
      std::string name;
      long count = 0;
      ls >> name >> count;
      if (!ls) throw std::runtime_error("malformed-header: bad element line '" + line + "'");
      if (name == "vertex") {
        if (vertex_element_seen) throw std::runtime_error("malformed-header: duplicate vertex element");
        vertex_element_seen = true;
        in_vertex_element = true;
        vertex_count = count;
      } else {
        if (!vertex_element_seen)
          throw std::runtime_error("malformed-header: element '" + name + "' precedes vertex element");
        in_vertex_element = false;  // trailing elements are ignored
      }
    } else if (word == "property") {
      std::string type;
      ls >> type;
      if (type == "list") {
        if (in_vertex_element)
          throw std::runtime_error("malformed-header: list property on vertex element");
        continue;
      }
      std::string name;
      ls >> name;
      if (!ls) throw std::runtime_error("malformed-header: bad property line '" + line + "'");
      if (in_vertex_element) props.push_back({name, parse_scalar(type, "property " + name)});
    } else if (word == "end_header") {
      break;
    } else {
      throw std::runtime_error("malformed-header: unexpected line '" + line + "'");
    }
  }
  if (!format_seen) throw std::runtime_error("malformed-header: missing format line");
  if (vertex_count < 0) throw std::runtime_error("malformed-header: missing vertex element");

  auto find_prop = [&](const std::string& name) {
    for (size_t i = 0; i < props.size(); ++i)
      if (props[i].name == name) return static_cast<int>(i);
    return -1;
  };

  int ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
  if (ix < 0) throw std::runtime_error("missing-geometry-property: x");
  if (iy < 0) throw std::runtime_error("missing-geometry-property: y");
  if (iz < 0) throw std::runtime_error("missing-geometry-property: z");

  int ir = find_prop("red"), ig = find_prop("green"), ib = find_prop("blue");
  std::vector<int> attr_cols;
  if (ir >= 0 && ig >= 0 && ib >= 0) {
    attr_cols = {ir, ig, ib};
  } else {
    // first non-geometry scalar property becomes the single attribute channel
    for (size_t i = 0; i < props.size(); ++i) {
      int pi = static_cast<int>(i);
      if (pi == ix || pi == iy || pi == iz) continue;
      attr_cols = {pi};
      break;
    }
    if (attr_cols.empty()) throw std::runtime_error("missing-attribute-property: red/green/blue or scalar");
  }

  PointCloudFrame frame;
  frame.geometry.resize(static_cast<size_t>(vertex_count));
  frame.attributes = Mat(static_cast<int>(vertex_count), static_cast<int>(attr_cols.size()));

  std::vector<double> row(props.size());
  for (long v = 0; v < vertex_count; ++v) {
    if (binary) {
      for (size_t p = 0; p < props.size(); ++p) row[p] = read_binary_scalar(in, props[p].type);
    } else {
      for (size_t p = 0; p < props.size(); ++p) {
        if (!(in >> row[p]))
          throw std::runtime_error("malformed-header: truncated ascii vertex data at row " +
                                   std::to_string(v));
      }
    }
    frame.geometry[v] = {static_cast<int32_t>(std::llround(row[ix])),
                         static_cast<int32_t>(std::llround(row[iy])),
                         static_cast<int32_t>(std::llround(row[iz]))};
    for (size_t c = 0; c < attr_cols.size(); ++c)
      frame.attributes(static_cast<int>(v), static_cast<int>(c)) = row[attr_cols[c]];
  }
  return frame;
}

void save_ply(const PointCloudFrame& frame, const std::string& path) {
  validate_frame(frame);
  int channels = frame.channel_count();
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("save_ply: only 1 or 3 attribute channels supported");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << frame.point_count() << "\n";
  out << "property int x\nproperty int y\nproperty int z\n";
  if (channels == 3)
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  else
    out << "property uchar intensity\n";
  out << "end_header\n";

  for (int i = 0; i < frame.point_count(); ++i) {
    int32_t xyz[3] = {frame.geometry[i][0], frame.geometry[i][1], frame.geometry[i][2]};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    for (int c = 0; c < channels; ++c) {
      unsigned char b = static_cast<unsigned char>(round_to_u8(frame.attributes(i, c)));
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
  if (!out) throw std::runtime_error("unwritable-path: short write to '" + path + "'");
}

}
