#include "maro/service.h"

#include <cmath>
#include <cstdio>

#include <fmt/format.h>
#include <httplib.h>

#include "maro/error.h"

namespace maro {

namespace {

HttpReply JsonReply(int status, const Json& body) { return {status, body.dump(), "application/json"}; }

HttpReply ErrorReply(int status, const std::string& kind, const std::string& message,
                     const std::string* pointer = nullptr) {
  Json body = {{"error", kind}, {"message", message}};
  if (pointer) body["path"] = pointer->empty() ? "/" : *pointer;
  return JsonReply(status, body);
}

// Schema messages look like "<pointer>: text".
HttpReply SchemaReply(const std::string& message) {
  const size_t colon = message.find(": ");
  std::string pointer = colon == std::string::npos ? "" : message.substr(0, colon);
  if (!pointer.empty() && pointer[0] != '/') pointer.clear();
  const std::string text = pointer.empty() ? message : message.substr(colon + 2);
  return ErrorReply(422, "schema", text, &pointer);
}

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start < path.size()) {
    const size_t slash = path.find('/', start);
    const size_t end = slash == std::string::npos ? path.size() : slash;
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string Csv(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

Json PointsJson(const FrontApproximation& f) {
  Json out = Json::array();
  for (const ParetoPoint& p : f.points) {
    out.push_back({{"objectives", VectorToJson(p.objectives)}, {"x", VectorToJson(p.solution.x)}});
  }
  return out;
}

}  // namespace

NavigationService::NavigationService(const RunArtifact& artifact)
    : data_(std::make_shared<const NavigationData>(NavigationFromArtifact(artifact))),
      problem_hash_(artifact.problem_hash) {
  // Fails early (kMissingNsr and friends) rather than on the first open.
  NavigationSession probe(data_);
}

HttpReply NavigationService::Meta() const {
  const NavigationData& d = *data_;
  const MatrixXd f = d.maro_front.Objectives();
  return JsonReply(200, {{"objectives", d.objective_names},
                         {"ranges",
                          {{"lo", VectorToJson(f.colwise().minCoeff().transpose())},
                           {"hi", VectorToJson(f.colwise().maxCoeff().transpose())}}},
                         {"variables", {{"hnv", d.hnv_names}, {"wsv", d.wsv_names}}},
                         {"points", d.maro_front.size()},
                         {"problem_hash", problem_hash_},
                         {"tool_version", kToolVersion}});
}

HttpReply NavigationService::Fronts() const {
  const NavigationData& d = *data_;
  Json maro = PointsJson(d.maro_front);
  for (size_t i = 0; i < maro.size(); ++i) {
    maro[i]["nsr"] = VectorToJson(d.nsr[i].objectives);
    maro[i]["y_nsr"] = VectorToJson(d.nsr[i].y);
  }
  return JsonReply(200, {{"objectives", d.objective_names},
                         {"maro", maro},
                         {"nominal", PointsJson(d.nominal_front)}});
}

std::string NavigationService::CsvHeader() const {
  std::string h = "step,event";
  for (const char* group : {"f_nav", "nsr", "mo", "price"}) {
    for (const std::string& n : data_->objective_names) h += fmt::format(",{}_{}", group, n);
  }
  return h;
}

std::string NavigationService::CsvRow(const std::string& event, const SessionSnapshot& snap) const {
  std::string row = event;
  for (const VectorXd* v : {&snap.f_nav, &snap.markers.nsr, &snap.markers.mo, &snap.markers.price}) {
    for (int i = 0; i < v->size(); ++i) row += "," + Csv((*v)[i]);
  }
  return row;
}

HttpReply NavigationService::Open() {
  std::string id;
  auto session = std::make_shared<Session>(data_);
  session->log.push_back(CsvRow("open", session->nav.Snapshot()));
  const Json snapshot = ToJson(session->nav.Snapshot(), *data_);
  {
    std::lock_guard<std::mutex> lock(sessions_mutex_);
    id = fmt::format("s{}", next_id_++);
    sessions_[id] = session;
  }
  return JsonReply(201, {{"id", id}, {"snapshot", snapshot}});
}

std::shared_ptr<NavigationService::Session> NavigationService::Find(const std::string& id) {
  std::lock_guard<std::mutex> lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

HttpReply NavigationService::Command(Session& s, const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    const std::string root;
    return ErrorReply(422, "schema", fmt::format("body is not JSON (byte {})", e.byte), &root);
  }
  const SessionCommand cmd = CommandFromJson(j, *data_);
  std::lock_guard<std::mutex> lock(s.mutex);
  Json extra;
  std::string event;
  const std::string name = cmd.objective >= 0 ? data_->objective_names[cmd.objective] : "";
  switch (cmd.kind) {
    case SessionCommand::Kind::kMove: {
      const MoveOutcome o = s.nav.Move(cmd.objective, cmd.value);
      extra = {{"requested", o.requested}, {"applied", o.applied}, {"clamped", o.clamped}};
      event = fmt::format("move {} {}", name, Csv(cmd.value));
      break;
    }
    case SessionCommand::Kind::kRestrict:
      s.nav.SetRestriction(cmd.objective, cmd.value);
      event = fmt::format("restrict {} {}", name, Csv(cmd.value));
      break;
    case SessionCommand::Kind::kReset:
      s.nav.Reset();
      event = "reset";
      break;
  }
  const SessionSnapshot snap = s.nav.Snapshot();
  s.log.push_back(CsvRow(event, snap));
  Json out = ToJson(snap, *data_);
  if (!extra.is_null()) out["move"] = extra;
  return JsonReply(200, out);
}

HttpReply NavigationService::Handle(const std::string& method, const std::string& path,
                                    const std::string& body) {
  const std::vector<std::string> parts = SplitPath(path);
  auto not_allowed = [&] {
    return ErrorReply(405, "method_not_allowed", fmt::format("{} is not supported on {}", method, path));
  };
  try {
    if (parts.size() == 1 && parts[0] == "meta") return method == "GET" ? Meta() : not_allowed();
    if (parts.size() == 1 && parts[0] == "fronts") return method == "GET" ? Fronts() : not_allowed();
    if (parts.size() == 1 && parts[0] == "session") return method == "POST" ? Open() : not_allowed();
    if (parts.size() >= 2 && parts.size() <= 3 && parts[0] == "session") {
      const std::shared_ptr<Session> s = Find(parts[1]);
      if (!s) return ErrorReply(404, "unknown_session", fmt::format("no session '{}'", parts[1]));
      if (parts.size() == 2) {
        if (method == "GET") {
          std::lock_guard<std::mutex> lock(s->mutex);
          return JsonReply(200, ToJson(s->nav.Snapshot(), *data_));
        }
        if (method == "DELETE") {
          std::lock_guard<std::mutex> lock(sessions_mutex_);
          sessions_.erase(parts[1]);
          return JsonReply(200, {{"closed", parts[1]}});
        }
        return not_allowed();
      }
      if (parts[2] == "command") return method == "POST" ? Command(*s, body) : not_allowed();
      if (parts[2] == "path.csv") {
        if (method != "GET") return not_allowed();
        std::lock_guard<std::mutex> lock(s->mutex);
        std::string csv = CsvHeader() + "\n";
        for (size_t i = 0; i < s->log.size(); ++i) csv += fmt::format("{},{}\n", i, s->log[i]);
        return {200, csv, "text/csv"};
      }
    }
    return ErrorReply(404, "not_found", fmt::format("no route for {} {}", method, path));
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::kSchema:
        return SchemaReply(e.what());
      case ErrorKind::kInfeasibleRestrictions:
        return ErrorReply(409, ErrorKindName(e.kind()), e.what());
      case ErrorKind::kInvalidSpec:
      case ErrorKind::kTargetOutOfRange:
        return ErrorReply(422, ErrorKindName(e.kind()), e.what());
      default:
        return ErrorReply(500, ErrorKindName(e.kind()), e.what());
    }
  }
}

void NavigationService::Mount(httplib::Server& server) {
  const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpReply reply = Handle(req.method, req.path, req.body);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Delete(".*", handler);
  server.Put(".*", handler);
}

void Serve(const std::string& artifact_path, const std::string& host, int port) {
  const RunArtifact artifact = LoadArtifact(artifact_path);
  NavigationService service(artifact);
  httplib::Server server;
  service.Mount(server);
  std::fprintf(stderr, "serving %s on http://%s:%d\n", artifact_path.c_str(), host.c_str(), port);
  if (!server.listen(host, port)) {
    throw Error(ErrorKind::kUsage, fmt::format("cannot listen on {}:{}", host, port));
  }
}

}  // namespace maro
