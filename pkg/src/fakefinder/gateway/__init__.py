from .app import Services, build_services, create_app, openapi_document, serve

__all__ = ["Services", "build_services", "create_app", "openapi_document", "serve"]
