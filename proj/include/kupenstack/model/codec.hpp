/*
 * Copyright 2026 The KupenStack Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Serialization of resource objects.
//
// Stored form: full object (metadata incl. uid/versions, spec, status) as JSON
// with sorted keys. This is the canonical encoding; serialize -> parse ->
// serialize is byte-identical.
//
// Manifest form: YAML or JSON documents with apiVersion, kind,
// metadata {name, namespace, labels, annotations} and spec. Unknown fields
// are violations; status is ignored; defaults are filled in.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kupenstack/common.hpp"
#include "kupenstack/model/resource.hpp"

namespace kupenstack::model {

using Json = nlohmann::json;

Json toJson(const ResourceObject& obj);
Json specToJson(const ResourceObject& obj);
Json statusToJson(const ResourceObject& obj);
ResourceObject fromStoredJson(const Json& j);

std::string toCanonicalString(const ResourceObject& obj);
std::string toYaml(const Json& j);

/// Parse error with a source location; maps to CLI exit code 2.
class ParseError : public Error {
 public:
  ParseError(std::string file, int line, const std::string& message);
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

/// One manifest document: either decoded or rejected with violations.
struct ManifestDocument {
  std::string source;  // "file:index"
  int line = 0;
  std::optional<ResourceObject> object;
  std::vector<Violation> violations;
};

/// Decodes one manifest document already parsed to JSON. `defaultNamespace`
/// fills in metadata.namespace for namespaced kinds. Throws ValidationError.
ResourceObject decodeManifest(const Json& doc, std::string_view defaultNamespace = "default");

/// Parses YAML/JSON text (multi-document). Throws ParseError on syntax
/// errors; structural problems are reported per document.
std::vector<ManifestDocument> parseManifests(std::string_view text, std::string_view source,
                                             std::string_view defaultNamespace = "default");

/// Reads a file, or every *.yaml/*.yml/*.json file in a directory (sorted).
std::vector<ManifestDocument> loadManifests(const std::filesystem::path& path,
                                            std::string_view defaultNamespace = "default");

/// YAML text -> JSON with scalar inference (quoted scalars stay strings).
/// Throws ParseError.
std::vector<Json> yamlDocumentsToJson(std::string_view text, std::string_view source);

}  // namespace kupenstack::model
