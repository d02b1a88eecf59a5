#pragma once

#include <memory>
#include <string>
#include <vector>

#include "csnet/util.hpp"

namespace csnet {

enum class FeatureGroup { Style, Complexity, Bias, Affect, Moral, Embedding, Network };
enum class FeatureScope { Title, Body, Article, Source };

const char* to_string(FeatureGroup g);
const char* to_string(FeatureScope s);

struct FeatureDef {
  std::string name;
  FeatureGroup group;
  FeatureScope scope;
};

struct FeatureSchema {
  std::vector<FeatureDef> defs;

  std::size_t size() const { return defs.size(); }
  void check_unique_names() const;
  std::vector<std::string> names() const;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

struct FeatureVector {
  SchemaPtr schema;
  std::vector<double> values;
};

// Concatenation in argument order; group and scope tags survive. Feature
// name collisions are an error.
FeatureVector assemble_features(const std::vector<FeatureVector>& parts);
SchemaPtr assemble_schemas(const std::vector<SchemaPtr>& parts);

// Flat schema of `dim` entries named <prefix>_000 ... (embedding blocks).
SchemaPtr indexed_schema(const std::string& prefix, std::size_t dim,
                         FeatureGroup group, FeatureScope scope);

}  // namespace csnet
