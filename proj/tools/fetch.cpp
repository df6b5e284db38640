#include <fstream>

#include "cli.hpp"
#include "ipw/error.hpp"
#include "ipw/nsw.hpp"
#include "ipw/report.hpp"

// After Eigen: resolv.h defines a _res macro that collides with Eigen parameters.
#include <httplib.h>

namespace ipw::cli {

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("URL without scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

void download(const std::string& url, const std::filesystem::path& target) {
  const auto [origin, path] = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin.rfind("https://", 0) == 0)
    throw IoError("this build has no TLS support; download " + url + " manually into " +
                  target.parent_path().string());
#endif
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(60);
  const auto res = client.Get(path);
  if (!res) throw IoError("download of " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw IoError("download of " + url + " returned HTTP " + std::to_string(res->status));
  std::ofstream out(target, std::ios::binary);
  if (!out) throw IoError("cannot write " + target.string());
  out << res->body;
}

}  // namespace

nlohmann::json run_fetch(const std::filesystem::path& data_dir, const std::string& url_base,
                         bool offline) {
  std::filesystem::create_directories(data_dir);
  const auto treated = data_dir / kNswTreatedFile;
  const auto controls = data_dir / kNswControlFile;
  nlohmann::json files = nlohmann::json::array();
  if (!offline) {
    for (const char* name : {kNswTreatedFile, kNswControlFile}) {
      download(url_base + "/" + name, data_dir / name);
      files.push_back(name);
    }
  }
  const auto composite =
      build_nsw_composite(read_dehejia_wahba(treated), read_dehejia_wahba(controls));
  write_csv(composite.raw, data_dir / kNswCompositeFile);
  return make_report("fetch-data",
                     {{"data_dir", data_dir.string()},
                      {"downloaded", files},
                      {"composite", kNswCompositeFile},
                      {"n", composite.raw.size()},
                      {"n1", composite.raw.treated_count()},
                      {"dropped_controls", composite.dropped_controls},
                      {"overlap_cutoff", composite.overlap_cutoff}});
}

}  // namespace ipw::cli
