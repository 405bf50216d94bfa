#include "ladder/store.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ladder/rng.hpp"

namespace fs = std::filesystem;

namespace ladder {

nlohmann::json Event::to_json() const {
  nlohmann::json j{{"v", v},       {"seq", seq},       {"ts", ts},
                   {"team", team}, {"digest", digest}};
  j["score"] = score ? nlohmann::json(*score) : nlohmann::json();
  return j;
}

Event Event::from_json(const nlohmann::json& j) {
  Event e;
  e.v = j.at("v").get<int>();
  if (e.v != 1)
    throw std::runtime_error("unknown event schema version " +
                             std::to_string(e.v));
  e.seq = j.at("seq").get<long>();
  e.ts = j.at("ts").get<long>();
  e.team = j.at("team").get<std::string>();
  e.digest = j.at("digest").get<std::string>();
  if (!j.at("score").is_null()) e.score = j.at("score").get<double>();
  return e;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

namespace {

std::string format_label(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("label format failed");
  return std::string(buf, p);
}

double parse_double(std::string_view s, long line) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("malformed number '" + std::string(s) + "'", line);
  return x;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

std::string canonical_bytes(const LabelVector& labels) {
  std::string out;
  out.reserve(labels.size() * 2);
  for (double x : labels) {
    out += format_label(x);
    out += '\n';
  }
  return out;
}

LabelVector labels_from_canonical(std::string_view bytes) {
  LabelVector out;
  long line = 1;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos)
      throw ParseError("missing trailing newline", line);
    out.push_back(parse_double(bytes.substr(pos, nl - pos), line));
    pos = nl + 1;
    ++line;
  }
  return out;
}

LabelVector parse_submission_file(std::string_view bytes, long expected_n,
                                  const std::vector<double>& alphabet) {
  const auto check_label = [&](double x, long line) {
    if (alphabet.empty()) {
      if (!(x >= 0.0 && x <= 1.0))
        throw ParseError("label outside [0,1]", line);
    } else if (std::find(alphabet.begin(), alphabet.end(), x) ==
               alphabet.end()) {
      throw ParseError("label outside the declared alphabet", line);
    }
  };

  std::vector<std::pair<std::string_view, long>> lines;  // content, lineno
  {
    std::size_t pos = 0;
    long lineno = 0;
    while (pos <= bytes.size()) {
      std::size_t nl = bytes.find('\n', pos);
      if (nl == std::string_view::npos) nl = bytes.size();
      ++lineno;
      const std::string_view raw = trim(bytes.substr(pos, nl - pos));
      if (!raw.empty()) lines.emplace_back(raw, lineno);
      pos = nl + 1;
      if (nl == bytes.size()) break;
    }
  }
  if (!lines.empty() && lines.front().first == "id,label") lines.erase(lines.begin());

  if (static_cast<long>(lines.size()) != expected_n)
    throw ParseError("expected " + std::to_string(expected_n) +
                         " records, found " + std::to_string(lines.size()),
                     lines.empty() ? 1 : lines.back().second);

  LabelVector out(static_cast<std::size_t>(expected_n), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(expected_n), 0);
  bool with_ids = false;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& [content, lineno] = lines[k];
    const std::size_t comma = content.find(',');
    if (k == 0) with_ids = comma != std::string_view::npos;
    if ((comma != std::string_view::npos) != with_ids)
      throw ParseError("mixed positional and id,label records", lineno);
    if (with_ids) {
      const double idf = parse_double(trim(content.substr(0, comma)), lineno);
      const long id = static_cast<long>(idf);
      if (idf != static_cast<double>(id) || id < 0 || id >= expected_n)
        throw ParseError("id out of range", lineno);
      if (seen[static_cast<std::size_t>(id)])
        throw ParseError("duplicate id " + std::to_string(id), lineno);
      seen[static_cast<std::size_t>(id)] = 1;
      const double x = parse_double(trim(content.substr(comma + 1)), lineno);
      check_label(x, lineno);
      out[static_cast<std::size_t>(id)] = x;
    } else {
      const double x = parse_double(content, lineno);
      check_label(x, lineno);
      out[k] = x;
    }
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> split_assign(
    long n_total, double public_fraction, std::uint64_t seed) {
  if (n_total < 1) throw std::invalid_argument("n_total must be >= 1");
  if (!(public_fraction > 0.0 && public_fraction < 1.0))
    throw std::invalid_argument("public_fraction must lie in (0,1)");
  std::vector<int> idx(static_cast<std::size_t>(n_total));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 0xA55E7));
  rng.shuffle(idx);
  const long n_pub = std::lround(public_fraction * static_cast<double>(n_total));
  std::vector<int> pub(idx.begin(), idx.begin() + n_pub);
  std::vector<int> priv(idx.begin() + n_pub, idx.end());
  std::sort(pub.begin(), pub.end());
  std::sort(priv.begin(), priv.end());
  return {std::move(pub), std::move(priv)};
}

ReadLogResult read_log(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();

  ReadLogResult result;
  std::size_t pos = 0;
  long record = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string_view line =
        std::string_view(content).substr(pos, (complete ? nl : content.size()) - pos);
    ++record;
    if (!line.empty()) {
      const bool is_last = !complete || nl + 1 >= content.size();
      try {
        Event e = Event::from_json(nlohmann::json::parse(line));
        if (e.seq != static_cast<long>(result.events.size()) + 1)
          throw std::runtime_error("sequence gap at record " +
                                   std::to_string(record));
        if (!complete) {  // data without trailing newline: torn write
          result.torn_tail = true;
          break;
        }
        result.events.push_back(std::move(e));
      } catch (const nlohmann::json::exception&) {
        if (is_last) {
          result.torn_tail = true;
          break;
        }
        throw std::runtime_error("corrupt log record " + std::to_string(record) +
                                 " in " + path.string());
      }
    }
    if (!complete) break;
    pos = nl + 1;
  }
  return result;
}

EventLog EventLog::open(const fs::path& path, bool fsync) {
  // Drop a torn trailing record before appending.
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string content = ss.str();
    if (!content.empty() && content.back() != '\n') {
      const std::size_t cut = content.rfind('\n');
      fs::resize_file(path, cut == std::string::npos ? 0 : cut + 1);
    }
  }
  EventLog log;
  log.path_ = path;
  log.fsync_ = fsync;
  if (fs::exists(path)) log.last_seq_ = static_cast<long>(read_log(path).events.size());
  log.out_.open(path, std::ios::binary | std::ios::app);
  if (!log.out_) throw std::runtime_error("cannot open log for append: " + path.string());
  return log;
}

void EventLog::append(const Event& e) {
  if (e.seq != last_seq_ + 1)
    throw std::runtime_error("sequence gap: expected " +
                             std::to_string(last_seq_ + 1) + ", got " +
                             std::to_string(e.seq));
  out_ << e.to_json().dump() << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("log append failed");
  if (fsync_) {
    const int fd = ::open(path_.c_str(), O_WRONLY);
    if (fd >= 0) {
      ::fsync(fd);
      ::close(fd);
    }
  }
  last_seq_ = e.seq;
}

BlobStore::BlobStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::string BlobStore::put(std::string_view bytes) {
  const std::string digest = sha256_hex(bytes);
  const fs::path target = dir_ / digest;
  if (!fs::exists(target)) {
    const fs::path tmp = dir_ / (digest + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw std::runtime_error("blob write failed");
    }
    fs::rename(tmp, target);
  }
  return digest;
}

std::string BlobStore::get(const std::string& digest) const {
  std::ifstream in(dir_ / digest, std::ios::binary);
  if (!in) throw std::runtime_error("missing blob " + digest);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool BlobStore::has(const std::string& digest) const {
  return fs::exists(dir_ / digest);
}

}  // namespace ladder
