#ifndef MARO_SERVICE_H_
#define MARO_SERVICE_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "maro/navigation.h"
#include "maro/serialization.h"

namespace httplib {
class Server;
}

namespace maro {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Navigation service over one artifact.
//
//   GET    /meta                   objectives, ranges, variable names
//   GET    /fronts                 MARO and nominal fronts with markers
//   POST   /session                opens a session: 201 {id, snapshot}
//   GET    /session/{id}           current snapshot
//   POST   /session/{id}/command   {command, objective, value} -> snapshot
//   GET    /session/{id}/path.csv  every snapshot the session went through
//   DELETE /session/{id}           closes the session
//
// Errors are JSON {error, message, path?}: 404 for unknown routes and
// sessions, 422 for malformed bodies (path is the JSON pointer of the bad
// field), 409 when a restriction set excludes the whole front.
//
// Handle() is safe to call from many threads. Commands on one session are
// serialized by a per-session mutex; sessions never block each other.
class NavigationService {
 public:
  explicit NavigationService(const RunArtifact& artifact);

  HttpReply Handle(const std::string& method, const std::string& path,
                   const std::string& body);

  // Routes every request of `server` through Handle().
  void Mount(httplib::Server& server);

  const NavigationData& data() const { return *data_; }

 private:
  struct Session {
    std::mutex mutex;
    NavigationSession nav;
    std::vector<std::string> log;  // CSV rows

    explicit Session(std::shared_ptr<const NavigationData> d) : nav(std::move(d)) {}
  };

  HttpReply Meta() const;
  HttpReply Fronts() const;
  HttpReply Open();
  HttpReply Command(Session& s, const std::string& body);
  std::shared_ptr<Session> Find(const std::string& id);
  std::string CsvRow(const std::string& event, const SessionSnapshot& snap) const;
  std::string CsvHeader() const;

  std::shared_ptr<const NavigationData> data_;
  std::string problem_hash_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  long next_id_ = 1;
};

// Loads the artifact and serves it until the process is stopped. The file
// is only read.
void Serve(const std::string& artifact_path, const std::string& host, int port);

}  // namespace maro

#endif  // MARO_SERVICE_H_
