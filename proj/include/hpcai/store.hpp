#pragma once

// File-based results store: one JSON document per run under
// root/<workload>/<run_id>.json, an index rebuilt on demand, and an advisory
// lock that serializes writers.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hpcai/core.hpp"
#include "hpcai/json_io.hpp"

namespace hpcai::store {

namespace fs = std::filesystem;

inline constexpr const char* kIndexFile = ".hpcai-index.json";
inline constexpr const char* kLockFile = ".hpcai.lock";

struct Diagnostic {
  std::string source;
  ErrorKind kind = ErrorKind::SchemaError;
  std::string message;
};

inline json to_json(const Diagnostic& d) {
  return {{"source", d.source}, {"kind", std::string(to_string(d.kind))}, {"message", d.message}};
}

struct IngestResult {
  std::vector<RunRecord> runs;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline bool hidden(const fs::path& p) {
  const std::string name = p.filename().string();
  return !name.empty() && name.front() == '.';
}

inline std::vector<fs::path> json_files(const fs::path& path) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(path)) {
    out.push_back(path);
    return out;
  }
  if (!fs::is_directory(path)) throw Error(ErrorKind::Io, "no such file or directory: " + path.string());
  for (auto it = fs::recursive_directory_iterator(path); it != fs::recursive_directory_iterator(); ++it) {
    if (hidden(it->path())) {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().extension() == ".json") out.push_back(it->path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Parses every *.json file (a run object or an array of runs). Malformed JSON
/// and duplicate run ids abort; records that parse but break a core-model
/// invariant are skipped and reported as diagnostics.
inline IngestResult ingest(const fs::path& path, ParseOptions opts = {}) {
  IngestResult result;
  std::set<std::string> ids;
  for (const auto& file : detail::json_files(path)) {
    const json doc = read_json_file(file.string());
    const std::vector<json> items = doc.is_array() ? doc.get<std::vector<json>>() : std::vector<json>{doc};
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::string source = doc.is_array() ? file.string() + "[" + std::to_string(i) + "]" : file.string();
      try {
        RunRecord run = parse_run(items[i], opts);
        if (!ids.insert(run.run_id).second) {
          throw Error(ErrorKind::DuplicateRun, source + ": duplicate run_id '" + run.run_id + "'");
        }
        result.runs.push_back(std::move(run));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SchemaError) throw;
        result.diagnostics.push_back({source, e.kind(), e.what()});
      }
    }
  }
  return result;
}

/// RAII advisory lock on the store's lock file. Fails fast rather than
/// blocking when another writer holds it.
class WriteLock {
 public:
  explicit WriteLock(const fs::path& root) {
    const std::string path = (root / kLockFile).string();
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorKind::Io, "cannot open lock file " + path);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorKind::Io, "results store is locked by another writer: " + path);
    }
  }
  ~WriteLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  WriteLock(const WriteLock&) = delete;
  WriteLock& operator=(const WriteLock&) = delete;

 private:
  int fd_ = -1;
};

class ResultsStore {
 public:
  explicit ResultsStore(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }

  /// Rejects ids that are already stored, or repeated within `runs`.
  void put(const std::vector<RunRecord>& runs) {
    fs::create_directories(root_);
    WriteLock lock(root_);
    auto idx = scan();
    std::set<std::string> batch;
    for (const auto& r : runs) {
      validate(r);
      check_name(r.run_id, "run_id");
      check_name(r.workload, "workload");
      if (idx.count(r.run_id) || !batch.insert(r.run_id).second) {
        throw Error(ErrorKind::DuplicateRun, "run_id '" + r.run_id + "' is already stored");
      }
    }
    for (const auto& r : runs) {
      const fs::path file = path_for(r);
      fs::create_directories(file.parent_path());
      write_atomically(file, hpcai::to_json(r).dump(2) + "\n");
      idx[r.run_id] = file;
    }
    write_index(idx);
  }

  void put(const RunRecord& run) { put(std::vector<RunRecord>{run}); }

  std::optional<RunRecord> get(const std::string& run_id) const {
    auto idx = scan();
    auto it = idx.find(run_id);
    if (it == idx.end()) return std::nullopt;
    return parse_run(read_json_file(it->second.string()));
  }

  /// Every stored run, optionally restricted to one workload, in run_id order.
  std::vector<RunRecord> load(const std::optional<std::string>& workload = std::nullopt) const {
    if (!fs::exists(root_)) return {};
    auto runs = ingest(workload ? root_ / *workload : root_).runs;
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.run_id < b.run_id; });
    return runs;
  }

  /// run_id -> file, recomputed from the directory tree.
  std::map<std::string, fs::path> scan() const {
    std::map<std::string, fs::path> idx;
    if (!fs::exists(root_)) return idx;
    for (const auto& file : detail::json_files(root_)) idx[file.stem().string()] = file;
    return idx;
  }

  void rebuild_index() const {
    fs::create_directories(root_);
    WriteLock lock(root_);
    write_index(scan());
  }

  fs::path path_for(const RunRecord& r) const { return root_ / r.workload / (r.run_id + ".json"); }

 private:
  static void check_name(const std::string& s, const char* what) {
    const bool ok = !s.empty() && s.front() != '.' && std::all_of(s.begin(), s.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    });
    if (!ok) throw Error(ErrorKind::SchemaError, std::string(what) + " '" + s + "' is not usable as a file name");
  }

  static void write_atomically(const fs::path& file, const std::string& text) {
    const fs::path tmp = file.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
      out << text;
    }
    fs::rename(tmp, file);
  }

  void write_index(const std::map<std::string, fs::path>& idx) const {
    json j = json::object();
    for (const auto& [id, file] : idx) j[id] = fs::relative(file, root_).generic_string();
    write_atomically(root_ / kIndexFile, j.dump(2) + "\n");
  }

  fs::path root_;
};

}  // namespace hpcai::store
