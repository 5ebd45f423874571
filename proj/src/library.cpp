#include "toolrank/library.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toolrank/error.hpp"

namespace toolrank {

using nlohmann::json;

std::string_view to_string(QueryType type) {
  return type == QueryType::single_tool ? "single_tool" : "multi_tool";
}

QueryType parse_query_type(std::string_view text) {
  if (text == "single_tool") return QueryType::single_tool;
  if (text == "multi_tool") return QueryType::multi_tool;
  throw Error("unknown query type '" + std::string(text) + "'");
}

namespace {

std::string collapse_spaces(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string render_document(const ApiDoc& api, const Tool& tool) {
  std::string out = collapse_spaces(tool.category);
  out += " | ";
  out += collapse_spaces(tool.tool_name);
  out += " | ";
  out += collapse_spaces(api.api_name);
  out += " | ";
  out += collapse_spaces(api.description);
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

ToolLibrary ToolLibrary::build(std::vector<Tool> tools, std::vector<ApiDoc> apis,
                               std::vector<std::string> seen_tools) {
  ToolLibrary lib;
  for (auto& tool : tools) {
    if (tool.tool_id.empty()) throw Error("tool with empty tool_id");
    if (tool.api_ids.empty()) throw Error("tool '" + tool.tool_id + "' has no APIs");
    const std::string id = tool.tool_id;
    if (!lib.tools_.emplace(id, std::move(tool)).second)
      throw Error("duplicate tool_id '" + id + "'");
  }
  for (auto& api : apis) {
    if (api.api_id.empty()) throw Error("api with empty api_id");
    if (api.tool_id.empty()) throw Error("api '" + api.api_id + "' has empty tool_id");
    const std::string id = api.api_id;
    if (!lib.apis_.emplace(id, std::move(api)).second) throw Error("duplicate api_id '" + id + "'");
  }
  for (auto& [api_id, api] : lib.apis_) {
    auto it = lib.tools_.find(api.tool_id);
    if (it == lib.tools_.end())
      throw Error("dangling reference: api '" + api_id + "' references unknown tool '" + api.tool_id + "'");
    const auto& ids = it->second.api_ids;
    if (std::find(ids.begin(), ids.end(), api_id) == ids.end())
      throw Error("dangling reference: api '" + api_id + "' is not listed by tool '" + api.tool_id + "'");
    if (api.document_text.empty()) api.document_text = render_document(api, it->second);
    if (api.document_text.empty()) throw Error("api '" + api_id + "' renders to an empty document");
  }
  for (const auto& [tool_id, tool] : lib.tools_) {
    std::set<std::string_view> listed;
    for (const auto& api_id : tool.api_ids) {
      if (!listed.insert(api_id).second)
        throw Error("duplicate api_id '" + api_id + "' in tool '" + tool_id + "'");
      auto it = lib.apis_.find(api_id);
      if (it == lib.apis_.end())
        throw Error("dangling reference: tool '" + tool_id + "' lists unknown api '" + api_id + "'");
      if (it->second.tool_id != tool_id)
        throw Error("dangling reference: tool '" + tool_id + "' lists api '" + api_id +
                    "' which belongs to '" + it->second.tool_id + "'");
    }
  }
  for (auto& tool_id : seen_tools) {
    if (!lib.tools_.count(tool_id))
      throw Error("dangling reference: seen_tools lists unknown tool '" + tool_id + "'");
    lib.seen_.insert(std::move(tool_id));
  }
  return lib;
}

const Tool& ToolLibrary::tool(std::string_view tool_id) const {
  auto it = tools_.find(tool_id);
  if (it == tools_.end()) throw LookupError("unknown tool '" + std::string(tool_id) + "'");
  return it->second;
}

const ApiDoc& ToolLibrary::api(std::string_view api_id) const {
  auto it = apis_.find(api_id);
  if (it == apis_.end()) throw LookupError("unknown api '" + std::string(api_id) + "'");
  return it->second;
}

const Tool& ToolLibrary::tool_of(std::string_view api_id) const { return tool(api(api_id).tool_id); }

namespace {

struct LineCursor {
  const std::string& source;
  std::size_t line = 0;
};

const json& require(const json& obj, const char* key, const LineCursor& at) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(at.source, at.line, key, "missing required field");
  return *it;
}

std::string require_string(const json& obj, const char* key, const LineCursor& at, bool allow_empty = false) {
  const json& v = require(obj, key, at);
  if (!v.is_string()) throw DataError(at.source, at.line, key, "expected a string");
  auto s = v.get<std::string>();
  if (s.empty() && !allow_empty) throw DataError(at.source, at.line, key, "must not be empty");
  return s;
}

std::string optional_string(const json& obj, const char* key, const LineCursor& at) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw DataError(at.source, at.line, key, "expected a string");
  return it->get<std::string>();
}

std::vector<std::string> require_string_list(const json& obj, const char* key, const LineCursor& at) {
  const json& v = require(obj, key, at);
  if (!v.is_array()) throw DataError(at.source, at.line, key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw DataError(at.source, at.line, key, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

json parse_line(const std::string& text, const LineCursor& at) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(at.source, at.line, "", std::string("JSON parse error: ") + e.what());
  }
  if (!obj.is_object()) throw DataError(at.source, at.line, "", "expected a JSON object");
  return obj;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "", "cannot open file");
  return in;
}

}  // namespace

ToolLibrary read_library(std::istream& in, const std::string& source_name) {
  LineCursor at{source_name};
  std::vector<Tool> tools;
  std::vector<ApiDoc> apis;
  std::vector<std::string> seen;
  std::map<std::string, std::size_t> tool_lines;
  std::map<std::string, std::size_t> api_lines;
  bool have_meta = false;

  std::string text;
  while (std::getline(in, text)) {
    ++at.line;
    if (is_blank(text)) continue;
    const json obj = parse_line(text, at);
    const std::string kind = require_string(obj, "kind", at);
    if (kind == "tool") {
      Tool t;
      t.tool_id = require_string(obj, "tool_id", at);
      t.tool_name = require_string(obj, "tool_name", at, true);
      t.category = require_string(obj, "category", at, true);
      t.api_ids = require_string_list(obj, "api_ids", at);
      if (t.api_ids.empty()) throw DataError(at.source, at.line, "api_ids", "tool must list at least one API");
      if (!tool_lines.emplace(t.tool_id, at.line).second)
        throw DataError(at.source, at.line, "tool_id", "duplicate tool_id '" + t.tool_id + "'");
      tools.push_back(std::move(t));
    } else if (kind == "api") {
      ApiDoc a;
      a.api_id = require_string(obj, "api_id", at);
      a.tool_id = require_string(obj, "tool_id", at);
      a.api_name = require_string(obj, "api_name", at, true);
      a.description = optional_string(obj, "description", at);
      a.document_text = optional_string(obj, "document_text", at);
      if (!api_lines.emplace(a.api_id, at.line).second)
        throw DataError(at.source, at.line, "api_id", "duplicate api_id '" + a.api_id + "'");
      apis.push_back(std::move(a));
    } else if (kind == "meta") {
      if (have_meta) throw DataError(at.source, at.line, "kind", "duplicate meta record");
      have_meta = true;
      seen = require_string_list(obj, "seen_tools", at);
    } else {
      throw DataError(at.source, at.line, "kind", "unknown record kind '" + kind + "'");
    }
  }

  // Resolve cross references here so errors can name the offending line.
  for (const auto& a : apis) {
    if (!tool_lines.count(a.tool_id))
      throw DataError(at.source, api_lines[a.api_id], "tool_id",
                      "dangling reference: api '" + a.api_id + "' references unknown tool '" + a.tool_id + "'");
  }
  for (const auto& t : tools) {
    for (const auto& id : t.api_ids) {
      if (!api_lines.count(id))
        throw DataError(at.source, tool_lines[t.tool_id], "api_ids",
                        "dangling reference: tool '" + t.tool_id + "' lists unknown api '" + id + "'");
    }
  }
  for (const auto& id : seen) {
    if (!tool_lines.count(id))
      throw DataError(at.source, 0, "seen_tools", "dangling reference: unknown tool '" + id + "'");
  }
  try {
    return ToolLibrary::build(std::move(tools), std::move(apis), std::move(seen));
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(at.source, 0, "", e.what());
  }
}

ToolLibrary load_library(const std::string& path) {
  auto in = open_input(path);
  return read_library(in, path);
}

void write_library(const ToolLibrary& library, std::ostream& out) {
  json meta = {{"kind", "meta"}, {"seen_tools", json::array()}};
  for (const auto& id : library.seen_tools()) meta["seen_tools"].push_back(id);
  out << meta.dump() << '\n';
  for (const auto& [tool_id, tool] : library.tools()) {
    json t = {{"kind", "tool"},
              {"tool_id", tool.tool_id},
              {"tool_name", tool.tool_name},
              {"category", tool.category},
              {"api_ids", tool.api_ids}};
    out << t.dump() << '\n';
    for (const auto& api_id : tool.api_ids) {
      const ApiDoc& api = library.api(api_id);
      json a = {{"kind", "api"},
                {"api_id", api.api_id},
                {"tool_id", api.tool_id},
                {"api_name", api.api_name},
                {"description", api.description},
                {"document_text", api.document_text}};
      out << a.dump() << '\n';
    }
  }
}

void save_library(const ToolLibrary& library, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path, 0, "", "cannot open file for writing");
  write_library(library, out);
}

QueryType implied_query_type(const std::vector<std::string>& gold_api_ids, const ToolLibrary& library) {
  std::set<std::string_view> tools;
  for (const auto& id : gold_api_ids) tools.insert(library.api(id).tool_id);
  return tools.size() <= 1 ? QueryType::single_tool : QueryType::multi_tool;
}

void validate_record(const EvalRecord& record, const ToolLibrary& library) {
  if (record.gold_api_ids.empty()) throw Error("query '" + record.query_id + "' has an empty gold set");
  for (const auto& id : record.gold_api_ids) {
    if (!library.contains_api(id))
      throw Error("query '" + record.query_id + "' references unknown api '" + id + "'");
  }
  if (implied_query_type(record.gold_api_ids, library) != record.gold_query_type)
    throw Error("query '" + record.query_id + "' has gold_query_type '" +
                std::string(to_string(record.gold_query_type)) + "' inconsistent with its gold tools");
}

std::vector<EvalRecord> read_records(std::istream& in, const std::string& source_name, const ToolLibrary* library) {
  LineCursor at{source_name};
  std::vector<EvalRecord> records;
  std::set<std::string> ids;
  std::string text;
  while (std::getline(in, text)) {
    ++at.line;
    if (is_blank(text)) continue;
    const json obj = parse_line(text, at);
    EvalRecord r;
    r.query_id = require_string(obj, "query_id", at);
    r.query_text = require_string(obj, "query_text", at, true);
    r.gold_api_ids = require_string_list(obj, "gold_api_ids", at);
    std::sort(r.gold_api_ids.begin(), r.gold_api_ids.end());
    r.gold_api_ids.erase(std::unique(r.gold_api_ids.begin(), r.gold_api_ids.end()), r.gold_api_ids.end());
    if (r.gold_api_ids.empty()) throw DataError(at.source, at.line, "gold_api_ids", "gold set must not be empty");
    try {
      r.gold_query_type = parse_query_type(require_string(obj, "gold_query_type", at));
    } catch (const DataError&) {
      throw;
    } catch (const Error& e) {
      throw DataError(at.source, at.line, "gold_query_type", e.what());
    }
    r.subset = optional_string(obj, "subset", at);
    if (!ids.insert(r.query_id).second)
      throw DataError(at.source, at.line, "query_id", "duplicate query_id '" + r.query_id + "'");
    if (library != nullptr) {
      for (const auto& id : r.gold_api_ids) {
        if (!library->contains_api(id))
          throw DataError(at.source, at.line, "gold_api_ids", "dangling reference: unknown api '" + id + "'");
      }
      if (implied_query_type(r.gold_api_ids, *library) != r.gold_query_type)
        throw DataError(at.source, at.line, "gold_query_type", "inconsistent with the tools of gold_api_ids");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<EvalRecord> load_records(const std::string& path, const ToolLibrary* library) {
  auto in = open_input(path);
  return read_records(in, path, library);
}

void write_records(const std::vector<EvalRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    json obj = {{"query_id", r.query_id},
                {"query_text", r.query_text},
                {"gold_api_ids", r.gold_api_ids},
                {"gold_query_type", std::string(to_string(r.gold_query_type))},
                {"subset", r.subset}};
    out << obj.dump() << '\n';
  }
}

void save_records(const std::vector<EvalRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path, 0, "", "cannot open file for writing");
  write_records(records, out);
}

}  // namespace toolrank
