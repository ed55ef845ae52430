#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "hra/catalog.hpp"
#include "hra/csv.hpp"

namespace hra {

struct Ingested {
  Database db;
  SemanticDataModel model;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Loads a database catalog: a YAML file mapping table names to CSV paths,
/// with an optional description file. Paths are resolved relative to the
/// catalog file.
///
///   tables:
///     - name: schools
///       path: schools.csv
///   descriptions: schools_desc.yaml
inline Ingested ingest_catalog(const std::string& catalog_path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(catalog_path);
  } catch (const YAML::BadFile&) {
    throw Error("cannot open catalog file: " + catalog_path);
  } catch (const YAML::Exception& e) {
    throw LoadError("catalog file error at line " + std::to_string(e.mark.line + 1) + ": " +
                        e.msg,
                    std::size_t(e.mark.line + 1));
  }
  std::filesystem::path base = std::filesystem::path(catalog_path).parent_path();

  Ingested out;
  if (!doc["tables"]) throw LoadError("catalog file missing 'tables' key");
  for (const auto& t : doc["tables"]) {
    std::string name = t["name"].as<std::string>();
    std::string path = (base / t["path"].as<std::string>()).string();
    out.db.add(read_csv_file(path, name));
  }

  DescriptionDoc desc;
  bool have_desc = false;
  if (doc["descriptions"]) {
    std::string path = (base / doc["descriptions"].as<std::string>()).string();
    desc = DescriptionDoc::from_yaml(read_file(path));
    have_desc = true;
  }
  out.model = build_model(out.db.tables(), have_desc ? &desc : nullptr);
  return out;
}

}  // namespace hra
