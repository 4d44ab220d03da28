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

#include "kupenstack/model/codec.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "kupenstack/model/validate.hpp"

namespace kupenstack::model {

ParseError::ParseError(std::string file, int line, const std::string& message)
    : Error(ErrorCode::ParseError, file + ":" + std::to_string(line) + ": " + message),
      file_(std::move(file)),
      line_(line) {}

// ---- encoding ----------------------------------------------------------------

namespace {

template <typename E>
Json enumJson(E v) {
  return to_string(v);
}

Json conditionsJson(const Conditions& conditions) {
  Json arr = Json::array();
  for (const auto& c : conditions) {
    arr.push_back({{"type", to_string(c.type)},
                   {"status", to_string(c.status)},
                   {"reason", c.reason},
                   {"message", c.message},
                   {"observedGeneration", c.observedGeneration},
                   {"lastTransition", c.lastTransition}});
  }
  return arr;
}

Json specJson(const NamespaceSpec&) { return Json::object(); }

Json specJson(const OpenStackCloudSpec& spec) {
  Json services = Json::array();
  for (const auto& s : spec.services) {
    services.push_back({{"name", s.name},
                        {"version", s.version},
                        {"replicas", s.replicas},
                        {"configOverrides", s.configOverrides}});
  }
  return {{"services", services}};
}

Json specJson(const InstanceSpec& spec) {
  Json j = {{"flavor",
             {{"vcpus", spec.flavor.vcpus},
              {"ramMiB", spec.flavor.ramMiB},
              {"diskGiB", spec.flavor.diskGiB}}},
            {"imageRef", spec.imageRef},
            {"subnetRefs", spec.subnetRefs},
            {"nodeSelector", spec.nodeSelector}};
  if (spec.keyPairRef) j["keyPairRef"] = *spec.keyPairRef;
  return j;
}

Json specJson(const ImageSpec& spec) {
  return {{"sourceURI", spec.sourceURI},
          {"diskFormat", spec.diskFormat},
          {"containerFormat", spec.containerFormat}};
}

Json specJson(const NetworkSpec& spec) { return {{"shared", spec.shared}}; }

Json specJson(const SubnetSpec& spec) {
  Json j = {{"networkRef", spec.networkRef}, {"cidr", spec.cidr}};
  if (spec.allocationPool)
    j["allocationPool"] = {{"start", spec.allocationPool->start},
                           {"end", spec.allocationPool->end}};
  return j;
}

Json specJson(const RouterSpec& spec) {
  return {{"subnetRefs", spec.subnetRefs}, {"externalGateway", spec.externalGateway}};
}

Json specJson(const KeyPairSpec& spec) { return {{"publicKey", spec.publicKey}}; }

Json statusJson(const NamespaceStatus& s) {
  return {{"phase", s.phase}, {"conditions", conditionsJson(s.conditions)}};
}

Json statusJson(const OpenStackCloudStatus& s) {
  Json states = Json::object();
  for (const auto& [name, st] : s.serviceStates) {
    states[name] = {{"readyReplicas", st.readyReplicas},
                    {"desiredReplicas", st.desiredReplicas},
                    {"activeVersion", st.activeVersion},
                    {"activeConfigHash", st.activeConfigHash}};
  }
  return {{"serviceStates", states}, {"conditions", conditionsJson(s.conditions)}};
}

Json statusJson(const InstanceStatus& s) {
  Json j = {{"node", s.node},
            {"ipAddresses", s.ipAddresses},
            {"phase", enumJson(s.phase)},
            {"restartCount", s.restartCount},
            {"healAttempts", s.healAttempts},
            {"lastFailureCause", s.lastFailureCause},
            {"conditions", conditionsJson(s.conditions)}};
  if (s.instanceID) j["instanceID"] = *s.instanceID;
  if (s.nextHealTick) j["nextHealTick"] = *s.nextHealTick;
  return j;
}

Json statusJson(const ImageStatus& s) {
  Json j = {{"phase", enumJson(s.phase)}, {"conditions", conditionsJson(s.conditions)}};
  if (s.imageID) j["imageID"] = *s.imageID;
  return j;
}

Json statusJson(const RemoteStatus& s) {
  Json j = {{"phase", enumJson(s.phase)}, {"conditions", conditionsJson(s.conditions)}};
  if (s.serviceAssignedID) j["serviceAssignedID"] = *s.serviceAssignedID;
  return j;
}

}  // namespace

Json specToJson(const ResourceObject& obj) {
  return std::visit([](const auto& b) { return specJson(b.spec); }, obj.body);
}

Json statusToJson(const ResourceObject& obj) {
  return std::visit([](const auto& b) { return statusJson(b.status); }, obj.body);
}

Json toJson(const ResourceObject& obj) {
  Json meta = {{"name", obj.meta.name},
               {"uid", obj.meta.uid},
               {"resourceVersion", obj.meta.resourceVersion},
               {"generation", obj.meta.generation},
               {"creationTimestamp", obj.meta.creationTimestamp},
               {"labels", obj.meta.labels},
               {"annotations", obj.meta.annotations},
               {"finalizers", Json(std::vector<std::string>(obj.meta.finalizers.begin(),
                                                            obj.meta.finalizers.end()))}};
  if (!obj.meta.ns.empty()) meta["namespace"] = obj.meta.ns;
  if (obj.meta.deletionTimestamp) meta["deletionTimestamp"] = *obj.meta.deletionTimestamp;
  return {{"apiVersion", std::string(kApiVersion)},
          {"kind", std::string(obj.kind())},
          {"metadata", meta},
          {"spec", specToJson(obj)},
          {"status", statusToJson(obj)}};
}

std::string toCanonicalString(const ResourceObject& obj) { return toJson(obj).dump(); }

// ---- decoding ------------------------------------------------------------------

namespace {

/// Walks a JSON object, reporting type errors and unknown keys as violations.
class Reader {
 public:
  Reader(const Json& j, std::string path, std::vector<Violation>& out)
      : j_(j), path_(std::move(path)), out_(out) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }

  bool valid() const { return j_.is_object(); }

  void only(std::initializer_list<std::string_view> keys) {
    if (!valid()) return;
    for (const auto& [k, v] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        fail(sub(k), "unknown field");
    }
  }

  bool has(std::string_view key) const {
    return valid() && j_.contains(key) && !j_.at(std::string(key)).is_null();
  }

  const Json* get(std::string_view key) const {
    return has(key) ? &j_.at(std::string(key)) : nullptr;
  }

  std::string str(std::string_view key, bool required, std::string fallback = {}) {
    const Json* v = get(key);
    if (v == nullptr) {
      if (required) fail(sub(key), "required");
      return fallback;
    }
    return scalarString(*v, sub(key)).value_or(fallback);
  }

  std::optional<std::string> optStr(std::string_view key) {
    const Json* v = get(key);
    if (v == nullptr) return std::nullopt;
    return scalarString(*v, sub(key));
  }

  std::int64_t integer(std::string_view key, bool required, std::int64_t fallback) {
    const Json* v = get(key);
    if (v == nullptr) {
      if (required) fail(sub(key), "required");
      return fallback;
    }
    if (!v->is_number_integer()) {
      fail(sub(key), "must be an integer");
      return fallback;
    }
    return v->get<std::int64_t>();
  }

  std::optional<std::int64_t> optInteger(std::string_view key) {
    if (!has(key)) return std::nullopt;
    return integer(key, true, 0);
  }

  bool boolean(std::string_view key, bool fallback) {
    const Json* v = get(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) {
      fail(sub(key), "must be a boolean");
      return fallback;
    }
    return v->get<bool>();
  }

  StringMap map(std::string_view key) {
    StringMap m;
    const Json* v = get(key);
    if (v == nullptr) return m;
    if (!v->is_object()) {
      fail(sub(key), "must be a map");
      return m;
    }
    for (const auto& [k, val] : v->items()) {
      if (auto s = scalarString(val, sub(key) + "." + k)) m[k] = *s;
    }
    return m;
  }

  std::vector<std::string> strings(std::string_view key) {
    std::vector<std::string> out;
    const Json* v = get(key);
    if (v == nullptr) return out;
    if (!v->is_array()) {
      fail(sub(key), "must be a list");
      return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (auto s = scalarString((*v)[i], sub(key) + "[" + std::to_string(i) + "]"))
        out.push_back(*s);
    }
    return out;
  }

  std::string sub(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void fail(std::string path, std::string message) {
    out_.push_back({std::move(path), std::move(message)});
  }

 private:
  // Integers and booleans are accepted where a string is expected, since
  // YAML writers routinely leave `version: 2` or `gpu: true` unquoted.
  std::optional<std::string> scalarString(const Json& v, const std::string& path) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    fail(path, "must be a string");
    return std::nullopt;
  }

  const Json& j_;
  std::string path_;
  std::vector<Violation>& out_;
};

template <typename E, std::size_t N>
E parseEnum(Reader& r, std::string_view key, const E (&values)[N], E fallback) {
  auto text = r.str(key, false);
  if (text.empty()) return fallback;
  for (E v : values)
    if (text == to_string(v)) return v;
  r.fail(r.sub(key), "unknown value \"" + text + "\"");
  return fallback;
}

Conditions readConditions(Reader& parent, std::string_view key, std::vector<Violation>& out) {
  Conditions result;
  const Json* arr = parent.get(key);
  if (arr == nullptr) return result;
  if (!arr->is_array()) {
    parent.fail(parent.sub(key), "must be a list");
    return result;
  }
  for (std::size_t i = 0; i < arr->size(); ++i) {
    Reader r((*arr)[i], parent.sub(key) + "[" + std::to_string(i) + "]", out);
    r.only({"type", "status", "reason", "message", "observedGeneration", "lastTransition"});
    Condition c;
    c.type = parseEnum(r, "type",
                       {ConditionType::Ready, ConditionType::Progressing, ConditionType::Degraded},
                       ConditionType::Ready);
    c.status = parseEnum(
        r, "status", {ConditionStatus::True, ConditionStatus::False, ConditionStatus::Unknown},
        ConditionStatus::Unknown);
    c.reason = r.str("reason", false);
    c.message = r.str("message", false);
    c.observedGeneration = r.integer("observedGeneration", false, 0);
    c.lastTransition = r.integer("lastTransition", false, 0);
    result.push_back(std::move(c));
  }
  return result;
}

void readSpec(Reader& r, NamespaceSpec&, std::vector<Violation>&) { r.only({}); }

void readSpec(Reader& r, OpenStackCloudSpec& spec, std::vector<Violation>& out) {
  r.only({"services"});
  const Json* services = r.get("services");
  if (services == nullptr) return;
  if (!services->is_array()) {
    r.fail(r.sub("services"), "must be a list");
    return;
  }
  for (std::size_t i = 0; i < services->size(); ++i) {
    Reader s((*services)[i], r.sub("services") + "[" + std::to_string(i) + "]", out);
    s.only({"name", "version", "replicas", "configOverrides"});
    ServiceSpec svc;
    svc.name = s.str("name", true);
    svc.version = s.str("version", true);
    svc.replicas = s.integer("replicas", false, 1);
    svc.configOverrides = s.map("configOverrides");
    spec.services.push_back(std::move(svc));
  }
}

void readSpec(Reader& r, InstanceSpec& spec, std::vector<Violation>& out) {
  r.only({"flavor", "imageRef", "keyPairRef", "subnetRefs", "nodeSelector"});
  if (const Json* flavor = r.get("flavor")) {
    Reader f(*flavor, r.sub("flavor"), out);
    f.only({"vcpus", "ramMiB", "diskGiB"});
    spec.flavor.vcpus = f.integer("vcpus", true, 1);
    spec.flavor.ramMiB = f.integer("ramMiB", true, 512);
    spec.flavor.diskGiB = f.integer("diskGiB", true, 1);
  } else {
    r.fail(r.sub("flavor"), "required");
  }
  spec.imageRef = r.str("imageRef", true);
  spec.keyPairRef = r.optStr("keyPairRef");
  spec.subnetRefs = r.strings("subnetRefs");
  spec.nodeSelector = r.map("nodeSelector");
}

void readSpec(Reader& r, ImageSpec& spec, std::vector<Violation>&) {
  r.only({"sourceURI", "diskFormat", "containerFormat"});
  spec.sourceURI = r.str("sourceURI", true);
  spec.diskFormat = r.str("diskFormat", false, "qcow2");
  spec.containerFormat = r.str("containerFormat", false, "bare");
}

void readSpec(Reader& r, NetworkSpec& spec, std::vector<Violation>&) {
  r.only({"shared"});
  spec.shared = r.boolean("shared", false);
}

void readSpec(Reader& r, SubnetSpec& spec, std::vector<Violation>& out) {
  r.only({"networkRef", "cidr", "allocationPool"});
  spec.networkRef = r.str("networkRef", true);
  spec.cidr = r.str("cidr", true);
  if (const Json* pool = r.get("allocationPool")) {
    Reader p(*pool, r.sub("allocationPool"), out);
    p.only({"start", "end"});
    spec.allocationPool = AllocationPool{p.str("start", true), p.str("end", true)};
  }
}

void readSpec(Reader& r, RouterSpec& spec, std::vector<Violation>&) {
  r.only({"subnetRefs", "externalGateway"});
  spec.subnetRefs = r.strings("subnetRefs");
  spec.externalGateway = r.boolean("externalGateway", false);
}

void readSpec(Reader& r, KeyPairSpec& spec, std::vector<Violation>&) {
  r.only({"publicKey"});
  spec.publicKey = r.str("publicKey", true);
}

void readStatus(Reader& r, NamespaceStatus& s, std::vector<Violation>& out) {
  r.only({"phase", "conditions"});
  s.phase = r.str("phase", false);
  s.conditions = readConditions(r, "conditions", out);
}

void readStatus(Reader& r, OpenStackCloudStatus& s, std::vector<Violation>& out) {
  r.only({"serviceStates", "conditions"});
  if (const Json* states = r.get("serviceStates")) {
    if (!states->is_object()) {
      r.fail(r.sub("serviceStates"), "must be a map");
    } else {
      for (const auto& [name, v] : states->items()) {
        Reader st(v, r.sub("serviceStates") + "." + name, out);
        st.only({"readyReplicas", "desiredReplicas", "activeVersion", "activeConfigHash"});
        s.serviceStates[name] = {st.integer("readyReplicas", false, 0),
                                 st.integer("desiredReplicas", false, 0),
                                 st.str("activeVersion", false),
                                 st.str("activeConfigHash", false)};
      }
    }
  }
  s.conditions = readConditions(r, "conditions", out);
}

void readStatus(Reader& r, InstanceStatus& s, std::vector<Violation>& out) {
  r.only({"instanceID", "node", "ipAddresses", "phase", "restartCount", "healAttempts",
          "nextHealTick", "lastFailureCause", "conditions"});
  s.instanceID = r.optStr("instanceID");
  s.node = r.str("node", false);
  s.ipAddresses = r.strings("ipAddresses");
  s.phase = parseEnum(r, "phase",
                      {InstancePhase::Pending, InstancePhase::Building, InstancePhase::Running,
                       InstancePhase::Failed, InstancePhase::Healing, InstancePhase::Terminating},
                      InstancePhase::Pending);
  s.restartCount = r.integer("restartCount", false, 0);
  s.healAttempts = r.integer("healAttempts", false, 0);
  s.nextHealTick = r.optInteger("nextHealTick");
  s.lastFailureCause = r.str("lastFailureCause", false);
  s.conditions = readConditions(r, "conditions", out);
}

void readStatus(Reader& r, ImageStatus& s, std::vector<Violation>& out) {
  r.only({"imageID", "phase", "conditions"});
  s.imageID = r.optStr("imageID");
  s.phase = parseEnum(
      r, "phase",
      {ImagePhase::Pending, ImagePhase::Importing, ImagePhase::Active, ImagePhase::Failed},
      ImagePhase::Pending);
  s.conditions = readConditions(r, "conditions", out);
}

void readStatus(Reader& r, RemoteStatus& s, std::vector<Violation>& out) {
  r.only({"serviceAssignedID", "phase", "conditions"});
  s.serviceAssignedID = r.optStr("serviceAssignedID");
  s.phase = parseEnum(
      r, "phase",
      {RemotePhase::Pending, RemotePhase::Active, RemotePhase::Failed, RemotePhase::Deleting},
      RemotePhase::Pending);
  s.conditions = readConditions(r, "conditions", out);
}

/// Common envelope decoding. `stored` selects the full stored form
/// (uid/versions/status honoured) versus the manifest form.
ResourceObject decodeEnvelope(const Json& doc, bool stored, std::string_view defaultNamespace) {
  std::vector<Violation> out;
  Reader top(doc, "", out);
  if (!top.valid()) throw ValidationError(std::move(out));
  top.only({"apiVersion", "kind", "metadata", "spec", "status"});

  auto apiVersion = top.str("apiVersion", true);
  if (!apiVersion.empty() && apiVersion != kApiVersion)
    top.fail("apiVersion", "must be " + std::string(kApiVersion));
  auto kind = top.str("kind", true);
  if (kind.empty()) throw ValidationError(std::move(out));
  if (!isKnownKind(kind))
    throw Error(ErrorCode::UnknownKind, "unknown kind \"" + kind + "\"");

  ResourceObject obj;
  obj.body = makeBody(kind);

  const Json emptyObject = Json::object();
  const Json* metaJson = top.get("metadata");
  if (metaJson == nullptr) {
    top.fail("metadata", "required");
    metaJson = &emptyObject;
  }
  Reader meta(*metaJson, "metadata", out);
  if (stored) {
    meta.only({"name", "namespace", "uid", "resourceVersion", "generation", "labels",
               "annotations", "finalizers", "deletionTimestamp", "creationTimestamp"});
  } else {
    // Server-managed fields may appear when re-applying `get -o yaml` output;
    // they are accepted and ignored.
    meta.only({"name", "namespace", "labels", "annotations", "uid", "resourceVersion",
               "generation", "finalizers", "deletionTimestamp", "creationTimestamp"});
  }
  obj.meta.name = meta.str("name", true);
  obj.meta.ns = meta.str("namespace", false);
  if (!stored && obj.meta.ns.empty() && isNamespacedKind(kind))
    obj.meta.ns = std::string(defaultNamespace);
  obj.meta.labels = meta.map("labels");
  obj.meta.annotations = meta.map("annotations");
  if (stored) {
    obj.meta.uid = meta.str("uid", false);
    obj.meta.resourceVersion = meta.integer("resourceVersion", false, 0);
    obj.meta.generation = meta.integer("generation", false, 0);
    obj.meta.creationTimestamp = meta.integer("creationTimestamp", false, 0);
    auto finalizers = meta.strings("finalizers");
    obj.meta.finalizers = {finalizers.begin(), finalizers.end()};
    obj.meta.deletionTimestamp = meta.optInteger("deletionTimestamp");
  }

  const Json* specJson = top.get("spec");
  std::visit(
      [&](auto& b) {
        Reader spec(specJson != nullptr ? *specJson : emptyObject, "spec", out);
        readSpec(spec, b.spec, out);
        if (stored) {
          if (const Json* statusJson = top.get("status")) {
            Reader status(*statusJson, "status", out);
            readStatus(status, b.status, out);
          }
        }
      },
      obj.body);

  if (!out.empty()) throw ValidationError(std::move(out));
  return obj;
}

}  // namespace

ResourceObject fromStoredJson(const Json& j) { return decodeEnvelope(j, true, ""); }

ResourceObject decodeManifest(const Json& doc, std::string_view defaultNamespace) {
  ResourceObject obj = decodeEnvelope(doc, false, defaultNamespace);
  auto result = validate(obj);
  if (!result.ok()) throw ValidationError(std::move(result.violations));
  return obj;
}

// ---- YAML bridge ------------------------------------------------------------------

namespace {

Json scalarToJson(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted
  static const std::regex intRe(R"(^[-+]?(0|[1-9][0-9]*)$)");
  if (text.empty() || text == "~" || text == "null" || text == "Null" || text == "NULL")
    return nullptr;
  if (text == "true" || text == "True" || text == "TRUE") return true;
  if (text == "false" || text == "False" || text == "FALSE") return false;
  if (std::regex_match(text, intRe)) {
    try {
      return std::stoll(text);
    } catch (const std::out_of_range&) {
      return text;
    }
  }
  return text;
}

Json yamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalarToJson(node);
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      for (const auto& item : node) arr.push_back(yamlToJson(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yamlToJson(kv.second);
      return obj;
    }
  }
  return nullptr;
}

bool needsQuotes(const std::string& s) {
  if (s.empty()) return true;
  YAML::Node probe(s);
  Json inferred = scalarToJson(probe);
  if (!inferred.is_string()) return true;
  // Leading/trailing space or YAML indicator characters.
  static const std::string indicators = "-?:,[]{}#&*!|>'\"%@`";
  if (indicators.find(s.front()) != std::string::npos) return true;
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find(": ") != std::string::npos || s.find(" #") != std::string::npos ||
         s.find('\n') != std::string::npos;
}

void emitJson(YAML::Emitter& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object:
      if (j.empty()) {
        out << YAML::Flow << YAML::BeginMap << YAML::EndMap;
        return;
      }
      out << YAML::BeginMap;
      for (const auto& [k, v] : j.items()) {
        out << YAML::Key << k << YAML::Value;
        emitJson(out, v);
      }
      out << YAML::EndMap;
      return;
    case Json::value_t::array:
      if (j.empty()) {
        out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
        return;
      }
      out << YAML::BeginSeq;
      for (const auto& v : j) emitJson(out, v);
      out << YAML::EndSeq;
      return;
    case Json::value_t::string: {
      const auto& s = j.get_ref<const std::string&>();
      if (needsQuotes(s)) out << YAML::DoubleQuoted;
      out << s;
      return;
    }
    case Json::value_t::boolean:
      out << (j.get<bool>() ? "true" : "false");
      return;
    case Json::value_t::number_integer:
      out << j.get<std::int64_t>();
      return;
    case Json::value_t::number_unsigned:
      out << j.get<std::uint64_t>();
      return;
    case Json::value_t::number_float:
      out << j.get<double>();
      return;
    default:
      out << YAML::Null;
      return;
  }
}

}  // namespace

std::string toYaml(const Json& j) {
  YAML::Emitter out;
  emitJson(out, j);
  return std::string(out.c_str()) + "\n";
}

std::vector<Json> yamlDocumentsToJson(std::string_view text, std::string_view source) {
  std::vector<YAML::Node> docs;
  try {
    docs = YAML::LoadAll(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string(source), e.mark.line + 1, e.msg);
  }
  std::vector<Json> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(yamlToJson(d));
  return out;
}

std::vector<ManifestDocument> parseManifests(std::string_view text, std::string_view source,
                                             std::string_view defaultNamespace) {
  std::vector<YAML::Node> docs;
  try {
    docs = YAML::LoadAll(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string(source), e.mark.line + 1, e.msg);
  }
  std::vector<ManifestDocument> result;
  int index = 0;
  for (const auto& node : docs) {
    if (node.IsNull()) continue;
    ManifestDocument doc;
    doc.source = std::string(source) + "#" + std::to_string(index++);
    doc.line = node.Mark().line + 1;
    try {
      doc.object = decodeManifest(yamlToJson(node), defaultNamespace);
    } catch (const ValidationError& e) {
      doc.violations = e.violations();
    } catch (const Error& e) {
      doc.violations = {{"kind", e.what()}};
    }
    result.push_back(std::move(doc));
  }
  return result;
}

std::vector<ManifestDocument> loadManifests(const std::filesystem::path& path,
                                            std::string_view defaultNamespace) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      auto ext = entry.path().extension().string();
      if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml" || ext == ".json"))
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<ManifestDocument> all;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ParseError(f.string(), 0, "cannot read file");
    std::stringstream buf;
    buf << in.rdbuf();
    auto docs = parseManifests(buf.str(), f.string(), defaultNamespace);
    std::move(docs.begin(), docs.end(), std::back_inserter(all));
  }
  return all;
}

}  // namespace kupenstack::model
