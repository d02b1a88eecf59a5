#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "csnet/features.hpp"

namespace csnet {

const char* to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Style: return "style";
    case FeatureGroup::Complexity: return "complexity";
    case FeatureGroup::Bias: return "bias";
    case FeatureGroup::Affect: return "affect";
    case FeatureGroup::Moral: return "moral";
    case FeatureGroup::Embedding: return "embedding";
    default: return "network";
  }
}

const char* to_string(FeatureScope s) {
  switch (s) {
    case FeatureScope::Title: return "title";
    case FeatureScope::Body: return "body";
    case FeatureScope::Article: return "article";
    default: return "source";
  }
}

void FeatureSchema::check_unique_names() const {
  std::unordered_set<std::string> seen;
  for (const auto& d : defs)
    if (!seen.insert(d.name).second)
      throw Error("duplicate feature name: " + d.name);
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(defs.size());
  for (const auto& d : defs) out.push_back(d.name);
  return out;
}

SchemaPtr assemble_schemas(const std::vector<SchemaPtr>& parts) {
  auto combined = std::make_shared<FeatureSchema>();
  for (const auto& p : parts)
    combined->defs.insert(combined->defs.end(), p->defs.begin(),
                          p->defs.end());
  combined->check_unique_names();
  return combined;
}

FeatureVector assemble_features(const std::vector<FeatureVector>& parts) {
  std::vector<SchemaPtr> schemas;
  schemas.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.schema->size() != p.values.size())
      throw Error("feature vector does not match its schema");
    schemas.push_back(p.schema);
  }
  FeatureVector out;
  out.schema = assemble_schemas(schemas);
  out.values.reserve(out.schema->size());
  for (const auto& p : parts)
    out.values.insert(out.values.end(), p.values.begin(), p.values.end());
  return out;
}

SchemaPtr indexed_schema(const std::string& prefix, std::size_t dim,
                         FeatureGroup group, FeatureScope scope) {
  static std::mutex mu;
  static std::unordered_map<std::string, SchemaPtr> cache;
  std::string key = prefix + "/" + std::to_string(dim);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto schema = std::make_shared<FeatureSchema>();
  schema->defs.reserve(dim);
  char buf[32];
  for (std::size_t i = 0; i < dim; ++i) {
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    schema->defs.push_back({prefix + "_" + buf, group, scope});
  }
  cache.emplace(key, schema);
  return schema;
}

}  // namespace csnet
